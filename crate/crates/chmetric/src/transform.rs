//! Change of variables from Eulerian snapshots to the monotone triple
//! (Y, U, P) indexed by cumulative energy, and the rescaling that maps every
//! state onto the unit interval where the Lipschitz metric lives.
//!
//! The key object is the strictly increasing function G = 2 p_x + 2 F with
//! range (0, 2C). Its generalized inverse Y(eta) = sup { x : G(x) < eta }
//! absorbs wave breaking: where the energy measure has an atom, G jumps and
//! Y develops a plateau, but (Y, U, P^{1/2}) stays Lipschitz in eta.

use crate::error::{Error, Result};
use crate::fields::EulerianSnapshot;
use crate::grid;
use crate::peakon::PeakonParams;
use serde::{Deserialize, Serialize};

/// The transformed state sampled on the midpoint grid
/// eta_k = (k + 1/2) (2C / n) of (0, 2C).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransformedSnapshot {
    pub t: f64,
    pub eta: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
}

/// The rescaled state on the unit interval: y = A Y(A^2 .), u = A U(A^2 .),
/// psqrt = A P^{1/2}(A^2 .), with amplitude a = A = sqrt(2C). The zero
/// solution is represented by a = 0 and vanishing fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaledSnapshot {
    pub t: f64,
    pub eta: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub psqrt: Vec<f64>,
    #[serde(rename = "A")]
    pub a: f64,
}

/// Generalized inverse of a nondecreasing table at `target`: the piecewise
/// linear interpolant of x as a function of g, taking the left endpoint on
/// plateaus and the plateau value across jumps (entries with equal x).
/// Errors if `target` lies outside the table range.
pub fn pseudo_inverse(xs: &[f64], gs: &[f64], target: f64) -> Result<f64> {
    if xs.len() != gs.len() {
        return Err(Error::GridMismatch {
            left: xs.len(),
            right: gs.len(),
        });
    }
    if xs.is_empty() || target < gs[0] || target > gs[gs.len() - 1] {
        let lo = gs.first().copied().unwrap_or(f64::NAN);
        let hi = gs.last().copied().unwrap_or(f64::NAN);
        return Err(Error::TargetOutOfRange { target, lo, hi });
    }
    let i = gs.partition_point(|&g| g < target);
    if i == 0 {
        return Ok(xs[0]);
    }
    if gs[i] == target {
        return Ok(xs[i]);
    }
    let (gl, gr) = (gs[i - 1], gs[i]);
    let (xl, xr) = (xs[i - 1], xs[i]);
    if gr <= gl {
        return Ok(xl);
    }
    Ok(xl + (xr - xl) * (target - gl) / (gr - gl))
}

/// The (x, G) relabeling table of a snapshot. Atoms contribute a vertical
/// jump: two entries at the atom location carrying the left and right limits
/// of G, so the generalized inverse reproduces the plateau of Y exactly.
fn relabel_table(snap: &EulerianSnapshot) -> (Vec<f64>, Vec<f64>) {
    let ev = snap.evaluator();
    let g_nodes = ev.g_at_nodes();
    let mut xs = Vec::with_capacity(snap.x.len() + 2 * snap.atoms.len());
    let mut gs = Vec::with_capacity(xs.capacity());
    let mut atoms = snap.atoms.clone();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ai = 0;
    let push_atoms_before = |x: f64, xs: &mut Vec<f64>, gs: &mut Vec<f64>, ai: &mut usize| {
        while *ai < atoms.len() && atoms[*ai].0 <= x {
            let (loc, m) = atoms[*ai];
            // G(loc) under the sign(0) = 0 and left-continuous-F conventions
            // sits mid-jump: the one-sided limits are G(loc) + m/2 + {0, m}.
            let g_mid = ev.g(loc);
            xs.push(loc);
            gs.push(g_mid + 0.5 * m);
            xs.push(loc);
            gs.push(g_mid + 1.5 * m);
            *ai += 1;
        }
    };
    for (i, &x) in snap.x.iter().enumerate() {
        push_atoms_before(x - 0.0, &mut xs, &mut gs, &mut ai);
        if ai > 0 && atoms[ai - 1].0 == x {
            continue;
        }
        xs.push(x);
        gs.push(g_nodes[i]);
    }
    push_atoms_before(f64::INFINITY, &mut xs, &mut gs, &mut ai);
    // Guard against roundoff-scale monotonicity violations in the table.
    grid::cummax(&mut gs);
    (xs, gs)
}

/// Transform a snapshot to (Y, U, P) on the n-point midpoint grid of
/// (0, 2C). Fails with `ZeroSolution` when C = 0, where the energy variable
/// has no range; the zero state is represented directly by
/// [`zero_scaled`].
pub fn build_transformed(snap: &EulerianSnapshot, n: usize) -> Result<TransformedSnapshot> {
    snap.validate()?;
    if snap.c <= 0.0 {
        return Err(Error::ZeroSolution);
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one eta cell".into()));
    }
    let upper = 2.0 * snap.c;
    let (xs, gs) = relabel_table(snap);
    let ev = snap.evaluator();
    let eta = grid::midpoint_grid(n, upper);
    let n_table = xs.len();
    let (g_lo, g_hi) = (gs[0], gs[n_table - 1]);
    let mut y = Vec::with_capacity(n);
    for &e in &eta {
        // Outside the sampled range the tails of G are exponential: G ~ K e^x
        // on the left and 2C - G ~ K' e^{-x} on the right, so invert those.
        let yk = if e < g_lo {
            xs[0] + (e / g_lo).ln()
        } else if e > g_hi {
            let rem = (upper - e).max(f64::MIN_POSITIVE);
            let rem0 = (upper - g_hi).max(f64::MIN_POSITIVE);
            xs[n_table - 1] + (rem0 / rem).ln()
        } else {
            pseudo_inverse(&xs, &gs, e)?
        };
        y.push(yk);
    }
    grid::cummax(&mut y);
    let (x0, x1) = (snap.x[0], snap.x[snap.x.len() - 1]);
    let (u0, u1) = (snap.u[0], snap.u[snap.u.len() - 1]);
    let u: Vec<f64> = y
        .iter()
        .map(|&yk| {
            if yk < x0 {
                u0 * (yk - x0).exp()
            } else if yk > x1 {
                u1 * (x1 - yk).exp()
            } else {
                grid::linear_interp(&snap.x, &snap.u, yk)
            }
        })
        .collect();
    let p: Vec<f64> = y.iter().map(|&yk| ev.p(yk)).collect();
    Ok(TransformedSnapshot {
        t: snap.t,
        eta,
        y,
        u,
        p,
        c: snap.c,
    })
}

impl TransformedSnapshot {
    /// Amplitude A = sqrt(2C) of the rescaling that sends this state to the
    /// unit interval.
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.c).sqrt()
    }

    /// Structural checks: matching lengths, nondecreasing y, p within
    /// [0, C/2] up to roundoff, |u| <= sqrt(C) and u^2 <= 2 p up to roundoff.
    pub fn validate(&self) -> Result<()> {
        let n = self.eta.len();
        if self.y.len() != n || self.u.len() != n || self.p.len() != n {
            return Err(Error::GridMismatch {
                left: n,
                right: self.y.len(),
            });
        }
        if self.y.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("Y must be nondecreasing".into()));
        }
        let slack = crate::tol::TRANSFORMED_INVARIANT * self.c.max(1.0);
        for k in 0..n {
            if self.p[k] < -slack || self.p[k] > 0.5 * self.c + slack {
                return Err(Error::InvalidInput(format!(
                    "P out of [0, C/2] at eta = {}: {}",
                    self.eta[k], self.p[k]
                )));
            }
            if self.u[k] * self.u[k] > 2.0 * self.p[k] + slack {
                return Err(Error::InvalidInput(format!(
                    "U^2 <= 2P violated at eta = {}",
                    self.eta[k]
                )));
            }
        }
        Ok(())
    }
}

/// Rescale a transformed state onto the unit interval. The midpoint nodes
/// map onto each other exactly, so this is a pure amplitude scaling of the
/// stored samples: no interpolation and no quadrature error.
pub fn rescale(ts: &TransformedSnapshot) -> ScaledSnapshot {
    let a = ts.amplitude();
    let n = ts.eta.len();
    ScaledSnapshot {
        t: ts.t,
        eta: grid::midpoint_grid(n, 1.0),
        y: ts.y.iter().map(|&v| a * v).collect(),
        u: ts.u.iter().map(|&v| a * v).collect(),
        psqrt: ts.p.iter().map(|&v| a * v.max(0.0).sqrt()).collect(),
        a,
    }
}

/// The zero solution as a rescaled state: amplitude 0 and vanishing fields.
pub fn zero_scaled(n: usize) -> ScaledSnapshot {
    ScaledSnapshot {
        t: 0.0,
        eta: grid::midpoint_grid(n, 1.0),
        y: vec![0.0; n],
        u: vec![0.0; n],
        psqrt: vec![0.0; n],
        a: 0.0,
    }
}

impl ScaledSnapshot {
    pub fn validate(&self) -> Result<()> {
        let n = self.eta.len();
        if self.y.len() != n || self.u.len() != n || self.psqrt.len() != n {
            return Err(Error::GridMismatch {
                left: n,
                right: self.y.len(),
            });
        }
        if self.a.is_nan() || self.a < 0.0 {
            return Err(Error::InvalidInput(format!("amplitude {} < 0", self.a)));
        }
        if self.y.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("scaled Y must be nondecreasing".into()));
        }
        if self.psqrt.iter().any(|&q| q < 0.0) {
            return Err(Error::InvalidInput("P^{1/2} must be nonnegative".into()));
        }
        Ok(())
    }

    /// Midpoint-rule L^2([0,1]) norms of (y, u, psqrt).
    pub fn l2_norms(&self) -> (f64, f64, f64) {
        (
            grid::l2_midpoint(&self.y, 1.0),
            grid::l2_midpoint(&self.u, 1.0),
            grid::l2_midpoint(&self.psqrt, 1.0),
        )
    }

    /// P at the nodes, recovered from its square root.
    pub fn p_values(&self) -> Vec<f64> {
        self.psqrt.iter().map(|&q| q * q).collect()
    }

    /// Maximum residual of the differential relation tying the three fields
    /// to the energy density in the scaled variables,
    ///   u^2 y_eta^2 + A^2 u_eta^2 = y_eta h_eta,
    ///   h_eta = A^5 - 2 p y_eta + u^2 y_eta.
    ///
    /// The relation holds with one-sided derivatives on either side of a
    /// kink, so it is evaluated with matched forward and matched backward
    /// stencils and the smaller residual is kept. The normalization
    /// A^6 + A^4 y_eta^2 matches the size of the terms and stays meaningful
    /// near the interval ends, where y_eta itself is unbounded.
    pub fn relation_residual(&self) -> f64 {
        let n = self.eta.len();
        if n < 4 || self.a == 0.0 {
            return 0.0;
        }
        let h = 1.0 / n as f64;
        let a = self.a;
        let p = self.p_values();
        let a5 = a.powi(5);
        let yf = grid::oneside_slopes(&self.y, h, true);
        let yb = grid::oneside_slopes(&self.y, h, false);
        let uf = grid::oneside_slopes(&self.u, h, true);
        let ub = grid::oneside_slopes(&self.u, h, false);
        let mut worst = 0.0f64;
        for k in 0..n {
            let u2 = self.u[k] * self.u[k];
            let res = |yd: f64, ud: f64| {
                let heta = a5 - 2.0 * p[k] * yd + u2 * yd;
                let lhs = u2 * yd * yd + a * a * ud * ud;
                let scale = a.powi(6) + a.powi(4) * yd * yd;
                (lhs - yd * heta).abs() / scale.max(f64::MIN_POSITIVE)
            };
            worst = worst.max(res(yf[k], uf[k]).min(res(yb[k], ub[k])));
        }
        worst
    }
}

impl PeakonParams {
    /// Closed-form transformed state on the midpoint grid, the reference for
    /// every numerical transform.
    pub fn transformed_exact(&self, t: f64, n: usize) -> Result<TransformedSnapshot> {
        let upper = 2.0 * self.c();
        let eta = grid::midpoint_grid(n, upper);
        let mut y = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        for &e in &eta {
            y.push(self.y_exact(t, e)?);
            u.push(self.u_of_eta(t, e)?);
            p.push(self.p_of_eta(t, e)?);
        }
        Ok(TransformedSnapshot {
            t,
            eta,
            y,
            u,
            p,
            c: self.c(),
        })
    }

    /// Closed-form rescaled state on the unit midpoint grid.
    pub fn scaled_snapshot_exact(&self, t: f64, n: usize) -> Result<ScaledSnapshot> {
        let eta = grid::midpoint_grid(n, 1.0);
        let mut y = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut psqrt = Vec::with_capacity(n);
        for &e in &eta {
            let (yv, uv, qv) = self.scaled_exact(t, e)?;
            y.push(yv);
            u.push(uv);
            psqrt.push(qv);
        }
        Ok(ScaledSnapshot {
            t,
            eta,
            y,
            u,
            psqrt,
            a: self.a(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pseudo_inverse_is_monotone_and_roundtrips(
            dx in proptest::collection::vec(1e-3f64..1.0, 2..24),
            dg in proptest::collection::vec(1e-3f64..1.0, 2..24),
            f1 in 0.0f64..1.0,
            f2 in 0.0f64..1.0,
        ) {
            let m = dx.len().min(dg.len());
            let mut xs = vec![0.0f64];
            let mut gs = vec![0.0f64];
            for k in 0..m {
                xs.push(xs[k] + dx[k]);
                gs.push(gs[k] + dg[k]);
            }
            let top = *gs.last().unwrap();
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let t1 = lo * top;
            let t2 = hi * top;
            let x1 = pseudo_inverse(&xs, &gs, t1).unwrap();
            let x2 = pseudo_inverse(&xs, &gs, t2).unwrap();
            prop_assert!(x1 <= x2 + 1e-12);
            for k in 0..xs.len() {
                let xk = pseudo_inverse(&xs, &gs, gs[k]).unwrap();
                prop_assert!((xk - xs[k]).abs() <= 1e-9 * (1.0 + xs[k].abs()));
            }
            // The table is strictly increasing, so composing it with the
            // inverse is the identity.
            let g1 = grid::linear_interp(&xs, &gs, x1);
            prop_assert!((g1 - t1).abs() <= 1e-9 * (1.0 + top));
        }
    }

    #[test]
    fn pseudo_inverse_interpolates_and_handles_plateaus() {
        let xs = [0.0, 1.0, 2.0, 2.0, 3.0];
        let gs = [0.0, 1.0, 2.0, 4.0, 5.0];
        assert_eq!(pseudo_inverse(&xs, &gs, 0.5).unwrap(), 0.5);
        // Inside the jump the inverse sits on the plateau.
        assert_eq!(pseudo_inverse(&xs, &gs, 3.0).unwrap(), 2.0);
        assert_eq!(pseudo_inverse(&xs, &gs, 2.0).unwrap(), 2.0);
        assert_eq!(pseudo_inverse(&xs, &gs, 5.0).unwrap(), 3.0);
        assert!(matches!(
            pseudo_inverse(&xs, &gs, 5.5),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            pseudo_inverse(&xs, &gs, -0.1),
            Err(Error::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn transform_matches_closed_forms_smooth_time() {
        let pk = PeakonParams::new(2.0, 2.0).unwrap();
        let t = 3.0;
        let snap = pk.sample_eulerian(t, 2048);
        let ts = build_transformed(&snap, 1024).unwrap();
        ts.validate().unwrap();
        let exact = pk.transformed_exact(t, 1024).unwrap();
        let mut worst = (0.0f64, 0.0f64, 0.0f64);
        for k in 0..ts.eta.len() {
            worst.0 = worst.0.max((ts.y[k] - exact.y[k]).abs());
            worst.1 = worst.1.max((ts.u[k] - exact.u[k]).abs());
            worst.2 = worst.2.max((ts.p[k] - exact.p[k]).abs());
        }
        assert!(worst.0 < 5e-4, "sup|Y - Y_exact| = {}", worst.0);
        assert!(worst.1 < 5e-4, "sup|U - U_exact| = {}", worst.1);
        assert!(worst.2 < 5e-4, "sup|P - P_exact| = {}", worst.2);
    }

    #[test]
    fn transform_matches_closed_forms_at_breaking() {
        let pk = PeakonParams::new(2.0, 2.0).unwrap();
        let snap = pk.sample_eulerian(2.0, 2048);
        let ts = build_transformed(&snap, 1024).unwrap();
        let exact = pk.transformed_exact(2.0, 1024).unwrap();
        for k in 0..ts.eta.len() {
            assert!(
                (ts.y[k] - exact.y[k]).abs() < 5e-4,
                "plateau Y mismatch at eta = {}: {} vs {}",
                ts.eta[k],
                ts.y[k],
                exact.y[k]
            );
            assert!((ts.u[k] - exact.u[k]).abs() < 5e-4);
            assert!((ts.p[k] - exact.p[k]).abs() < 5e-4);
        }
    }

    #[test]
    fn roundtrip_g_of_y_recovers_eta() {
        let pk = PeakonParams::new(1.0, 0.0).unwrap();
        let t = 0.5;
        let snap = pk.sample_eulerian(t, 2048);
        let ts = build_transformed(&snap, 512).unwrap();
        for k in 0..ts.eta.len() {
            let g = pk.g_exact(t, ts.y[k]);
            assert!(
                (g - ts.eta[k]).abs() < crate::tol::ROUNDTRIP_G * 2.0 * pk.c(),
                "G(Y(eta)) = {} vs eta = {}",
                g,
                ts.eta[k]
            );
        }
    }

    #[test]
    fn zero_energy_snapshot_is_rejected() {
        let x: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let snap = EulerianSnapshot {
            t: 0.0,
            x,
            u: vec![0.0; 9],
            dens: vec![0.0; 9],
            atoms: vec![],
            c: 0.0,
        };
        assert!(matches!(
            build_transformed(&snap, 64),
            Err(Error::ZeroSolution)
        ));
    }

    #[test]
    fn rescale_is_exact_amplitude_scaling() {
        let pk = PeakonParams::new(2.0, 2.0).unwrap();
        let ts = pk.transformed_exact(3.0, 256).unwrap();
        let sc = rescale(&ts);
        sc.validate().unwrap();
        let a = pk.a();
        for k in 0..256 {
            assert_eq!(sc.y[k], a * ts.y[k]);
            assert_eq!(sc.u[k], a * ts.u[k]);
            assert!((sc.psqrt[k] - a * ts.p[k].sqrt()).abs() < 1e-15);
        }
        let exact = pk.scaled_snapshot_exact(3.0, 256).unwrap();
        for k in 0..256 {
            assert!((sc.y[k] - exact.y[k]).abs() < 1e-12);
            assert!((sc.u[k] - exact.u[k]).abs() < 1e-12);
            assert!((sc.psqrt[k] - exact.psqrt[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_relation_residual_is_small_for_exact_states() {
        let pk = PeakonParams::new(2.0, 2.0).unwrap();
        for t in [1.0, 2.0, 3.5] {
            let sc = pk.scaled_snapshot_exact(t, 4096).unwrap();
            let r = sc.relation_residual();
            assert!(r < 1e-4, "relation residual {r} at t = {t}");
        }
        // And it shrinks under refinement on the coarse-to-fine pair.
        let coarse = pk
            .scaled_snapshot_exact(3.5, 1024)
            .unwrap()
            .relation_residual();
        let fine = pk
            .scaled_snapshot_exact(3.5, 2048)
            .unwrap()
            .relation_residual();
        assert!(
            fine < 0.6 * coarse,
            "no refinement gain: {coarse} -> {fine}"
        );
    }

    #[test]
    fn zero_scaled_state_is_admissible() {
        let z = zero_scaled(128);
        z.validate().unwrap();
        let (ny, nu, np) = z.l2_norms();
        assert_eq!((ny, nu, np), (0.0, 0.0, 0.0));
        assert_eq!(z.relation_residual(), 0.0);
    }

    #[test]
    fn snapshot_json_roundtrip() {
        let pk = PeakonParams::new(2.0, 2.0).unwrap();
        let ts = pk.transformed_exact(3.0, 16).unwrap();
        let text = serde_json::to_string(&ts).unwrap();
        assert!(text.contains("\"C\":"));
        let back: TransformedSnapshot = serde_json::from_str(&text).unwrap();
        assert_eq!(back.y, ts.y);
        let sc = rescale(&ts);
        let text = serde_json::to_string(&sc).unwrap();
        assert!(text.contains("\"A\":"));
        let back: ScaledSnapshot = serde_json::from_str(&text).unwrap();
        assert_eq!(back.psqrt, sc.psqrt);
    }
}
