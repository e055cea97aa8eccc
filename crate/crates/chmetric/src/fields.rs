//! Eulerian-side field evaluation: the cumulative energy F, the pressure p,
//! its derivative p_x, and the transport quantity G = 2 p_x + 2 F, all from a
//! sampled (u, mu) pair via the exponential-kernel convolution
//!
//!   p(x) = 1/4 INT e^{-|x-y|} u^2 dy + 1/4 INT e^{-|x-y|} dmu.

use crate::error::{Error, Result};
use crate::grid;
use serde::{Deserialize, Serialize};

/// A conservative solution sampled at one instant: velocity samples u on a
/// nondecreasing grid, the absolutely continuous energy density, point
/// masses, and the total energy C = mu(R).
///
/// The grid may repeat a node: a duplicated x carries the one-sided values
/// of a field that jumps there (the energy density of a peakon jumps at the
/// peak because u_x does). Zero-width cells contribute nothing to any
/// quadrature, so each smooth piece is integrated with its own boundary
/// values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EulerianSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub dens: Vec<f64>,
    /// (location, mass) pairs, masses positive.
    pub atoms: Vec<(f64, f64)>,
    #[serde(rename = "C")]
    pub c: f64,
}

impl EulerianSnapshot {
    /// Structural checks: grid nondecreasing, matching lengths, nonnegative
    /// density, positive atom masses, energy closure, and the sup bound
    /// |u| <= sqrt(C).
    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.u.len() != n || self.dens.len() != n {
            return Err(Error::GridMismatch {
                left: n,
                right: self.u.len().max(self.dens.len()),
            });
        }
        if self.x.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("x grid must be nondecreasing".into()));
        }
        if self.dens.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(Error::InvalidInput("density must be nonnegative".into()));
        }
        if self.atoms.iter().any(|&(_, m)| m <= 0.0) {
            return Err(Error::InvalidInput("atom masses must be positive".into()));
        }
        let total = self.discrete_energy();
        if (total - self.c).abs() > crate::tol::SNAPSHOT_ENERGY_REL * self.c.max(1e-300) {
            return Err(Error::InvalidInput(format!(
                "energy closure failed: trapezoid + atoms = {total}, C = {}",
                self.c
            )));
        }
        let umax = self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cap = self.c.sqrt() * (1.0 + crate::tol::SNAPSHOT_ENERGY_REL);
        if umax > cap {
            return Err(Error::InvalidInput(format!(
                "sup|u| = {umax} exceeds sqrt(C) = {}",
                self.c.sqrt()
            )));
        }
        Ok(())
    }

    /// Trapezoid integral of the density plus the atom masses.
    pub fn discrete_energy(&self) -> f64 {
        let w = grid::trapezoid_weights(&self.x);
        let cont: f64 = w.iter().zip(&self.dens).map(|(w, d)| w * d).sum();
        cont + self.atoms.iter().map(|&(_, m)| m).sum::<f64>()
    }

    /// Cumulative energy F(x) = mu((-inf, x)); left-continuous at atoms.
    pub fn eval_f(&self, x: f64) -> f64 {
        self.evaluator().f(x)
    }

    /// Pressure p(x); builds the O(N) prefix data per call, so prefer
    /// [`EulerianSnapshot::evaluator`] when evaluating many points.
    pub fn eval_p(&self, x: f64) -> f64 {
        self.evaluator().p(x)
    }

    /// Pressure derivative p_x(x); sign(0) = 0 against atoms.
    pub fn eval_px(&self, x: f64) -> f64 {
        self.evaluator().px(x)
    }

    /// G(x) = 2 p_x(x) + 2 F(x); nondecreasing from 0 to 2C.
    pub fn eval_g(&self, x: f64) -> f64 {
        self.evaluator().g(x)
    }

    /// Precompute the prefix sweeps once for many-point evaluation.
    pub fn evaluator(&self) -> FieldEval<'_> {
        FieldEval::new(self)
    }
}

/// Precomputed kernel prefix integrals over the snapshot grid. Evaluation at
/// an arbitrary point splits the convolution at the kernel kink y = x by
/// inserting x as a quadrature node, which keeps the trapezoid rule second
/// order.
pub struct FieldEval<'a> {
    snap: &'a EulerianSnapshot,
    /// u^2 + dens at the nodes (the continuous part of the p integrand).
    vsq: Vec<f64>,
    /// t_left[i] = INT_{x_0}^{x_i} e^{y - x_i} (u^2 + dens) dy, cell trapezoid.
    t_left: Vec<f64>,
    /// t_right[i] = INT_{x_i}^{x_last} e^{x_i - y} (u^2 + dens) dy.
    t_right: Vec<f64>,
    /// Trapezoid prefix of dens alone: F's continuous part at the nodes.
    fcum: Vec<f64>,
}

impl<'a> FieldEval<'a> {
    pub fn new(snap: &'a EulerianSnapshot) -> Self {
        let n = snap.x.len();
        let vsq: Vec<f64> = (0..n)
            .map(|i| snap.u[i] * snap.u[i] + snap.dens[i])
            .collect();
        let mut t_left = vec![0.0; n];
        let mut t_right = vec![0.0; n];
        let mut fcum = vec![0.0; n];
        for i in 1..n {
            let dx = snap.x[i] - snap.x[i - 1];
            let decay = (snap.x[i - 1] - snap.x[i]).exp();
            t_left[i] = t_left[i - 1] * decay + 0.5 * dx * (vsq[i - 1] * decay + vsq[i]);
            fcum[i] = fcum[i - 1] + 0.5 * dx * (snap.dens[i - 1] + snap.dens[i]);
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let dx = snap.x[i + 1] - snap.x[i];
            let decay = (snap.x[i] - snap.x[i + 1]).exp();
            t_right[i] = t_right[i + 1] * decay + 0.5 * dx * (vsq[i] + vsq[i + 1] * decay);
        }
        FieldEval {
            snap,
            vsq,
            t_left,
            t_right,
            fcum,
        }
    }

    /// Left/right one-sided kernel integrals of u^2 + dens at x, splitting
    /// the containing cell at x itself.
    fn sides(&self, x: f64) -> (f64, f64) {
        let xs = &self.snap.x;
        let n = xs.len();
        if n == 0 {
            return (0.0, 0.0);
        }
        if x <= xs[0] {
            let d = (x - xs[0]).exp();
            return (0.0, d * (self.t_left[0] + self.t_right[0]));
        }
        if x >= xs[n - 1] {
            let d = (xs[n - 1] - x).exp();
            return (d * (self.t_left[n - 1] + self.t_right[n - 1]), 0.0);
        }
        let j = grid::bracket(xs, x).unwrap();
        let j1 = (j + 1).min(n - 1);
        if xs[j] == x || j1 == j {
            return (self.t_left[j], self.t_right[j]);
        }
        let frac = (x - xs[j]) / (xs[j1] - xs[j]);
        let vx = self.vsq[j] + (self.vsq[j1] - self.vsq[j]) * frac;
        let dl = (xs[j] - x).exp();
        let dr = (x - xs[j1]).exp();
        let left = self.t_left[j] * dl + 0.5 * (x - xs[j]) * (self.vsq[j] * dl + vx);
        let right = self.t_right[j1] * dr + 0.5 * (xs[j1] - x) * (vx + self.vsq[j1] * dr);
        (left, right)
    }

    pub fn p(&self, x: f64) -> f64 {
        let (l, r) = self.sides(x);
        let mut p = 0.25 * (l + r);
        for &(loc, m) in &self.snap.atoms {
            p += 0.25 * m * (-(x - loc).abs()).exp();
        }
        p
    }

    pub fn px(&self, x: f64) -> f64 {
        let (l, r) = self.sides(x);
        let mut px = -0.25 * (l - r);
        for &(loc, m) in &self.snap.atoms {
            let s = if x > loc {
                1.0
            } else if x < loc {
                -1.0
            } else {
                0.0
            };
            px -= 0.25 * m * s * (-(x - loc).abs()).exp();
        }
        px
    }

    /// F(x) = mu((-inf, x)): trapezoid prefix of the density with the
    /// partial cell split at x, plus the masses strictly left of x.
    pub fn f(&self, x: f64) -> f64 {
        let xs = &self.snap.x;
        let n = xs.len();
        let mut f = if n == 0 || x <= xs[0] {
            0.0
        } else if x >= xs[n - 1] {
            self.fcum[n - 1]
        } else {
            let j = grid::bracket(xs, x).unwrap();
            let j1 = j + 1;
            let frac = (x - xs[j]) / (xs[j1] - xs[j]);
            let dx_here = self.snap.dens[j] + (self.snap.dens[j1] - self.snap.dens[j]) * frac;
            self.fcum[j] + 0.5 * (x - xs[j]) * (self.snap.dens[j] + dx_here)
        };
        for &(loc, m) in &self.snap.atoms {
            if loc < x {
                f += m;
            }
        }
        f
    }

    pub fn g(&self, x: f64) -> f64 {
        2.0 * self.px(x) + 2.0 * self.f(x)
    }

    /// p at every grid node in one O(N) pass.
    pub fn p_at_nodes(&self) -> Vec<f64> {
        let n = self.snap.x.len();
        (0..n)
            .map(|i| {
                let mut p = 0.25 * (self.t_left[i] + self.t_right[i]);
                for &(loc, m) in &self.snap.atoms {
                    p += 0.25 * m * (-(self.snap.x[i] - loc).abs()).exp();
                }
                p
            })
            .collect()
    }

    /// G at every grid node in one O(N) pass.
    pub fn g_at_nodes(&self) -> Vec<f64> {
        let n = self.snap.x.len();
        (0..n)
            .map(|i| {
                let x = self.snap.x[i];
                let mut px = -0.25 * (self.t_left[i] - self.t_right[i]);
                let mut f = self.fcum[i];
                for &(loc, m) in &self.snap.atoms {
                    let s = if x > loc {
                        1.0
                    } else if x < loc {
                        -1.0
                    } else {
                        0.0
                    };
                    px -= 0.25 * m * s * (-(x - loc).abs()).exp();
                    if loc < x {
                        f += m;
                    }
                }
                2.0 * px + 2.0 * f
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_snapshot() -> EulerianSnapshot {
        let x: Vec<f64> = (0..41).map(|i| -10.0 + 0.5 * i as f64).collect();
        let n = x.len();
        EulerianSnapshot {
            t: 0.0,
            x,
            u: vec![0.0; n],
            dens: vec![0.0; n],
            atoms: vec![],
            c: 0.0,
        }
    }

    #[test]
    fn zero_solution_has_zero_fields() {
        let s = zero_snapshot();
        let e = s.evaluator();
        for x in [-3.0, 0.0, 2.5, 11.0] {
            assert_eq!(e.f(x), 0.0);
            assert_eq!(e.p(x), 0.0);
            assert_eq!(e.px(x), 0.0);
            assert_eq!(e.g(x), 0.0);
        }
    }

    #[test]
    fn single_atom_matches_kernel_closed_form() {
        let mut s = zero_snapshot();
        s.atoms = vec![(0.0, 4.0)];
        s.c = 4.0;
        let e = s.evaluator();
        // Point mass m at 0: p = (m/4) e^{-|x|}, caglad F.
        assert!((e.p(2.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((e.p(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(e.f(0.0), 0.0);
        assert_eq!(e.f(1e-12), 4.0);
        // p_x = -(m/4) sign(x) e^{-|x|} with sign(0) = 0.
        assert!((e.px(-1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((e.px(1.0) + (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(e.px(0.0), 0.0);
        // G jumps by the atom mass across 0.
        let jump = e.g(1e-9) - e.g(-1e-9);
        assert!((jump - 4.0).abs() < 1e-6);
    }

    #[test]
    fn validate_rejects_bad_grids() {
        let mut s = zero_snapshot();
        s.x[5] = s.x[4] - 0.25;
        assert!(s.validate().is_err(), "decreasing grid must be rejected");
        // A duplicated node is legal: it carries one-sided values at a jump.
        let mut s = zero_snapshot();
        s.x[5] = s.x[4];
        assert!(s.validate().is_ok());
    }
}
