//! Closed forms for the symmetric peakon-antipeakon solution with total
//! energy C = E^2 and breaking time t0. The pair collides at t = t0, where
//! all energy sits in one point mass at the origin and u vanishes
//! identically; the solution is global in time and conservative.
//!
//! Everything here is exact in terms of hyperbolic functions of
//! s = (E/2)(t - t0): Eulerian fields, the transformed triple
//! (Y, U, P) on the energy variable eta in (0, 2C), and its rescaled
//! version on the unit interval. These are the reference values every
//! numerical path in the crate is tested against.

use crate::error::{Error, Result};
use crate::fields::EulerianSnapshot;
use crate::grid;

/// Parameters of the exact solution: energy scale E (so C = E^2) and the
/// collision time t0.
#[derive(Clone, Copy, Debug)]
pub struct PeakonParams {
    pub e: f64,
    pub t0: f64,
}

/// Time-dependent coefficients of the closed forms. `beta` blows up at the
/// breaking time, hence the fallible constructor.
#[derive(Clone, Copy, Debug)]
pub struct Coeffs {
    pub alpha: f64,
    pub beta: f64,
    /// Half-width of the middle branch; the peaks sit at x = -gamma, gamma.
    pub gamma: f64,
    /// d alpha / dt.
    pub alpha_t: f64,
    /// d beta / dt.
    pub beta_t: f64,
}

impl PeakonParams {
    pub fn new(e: f64, t0: f64) -> Result<Self> {
        if !e.is_finite() || e <= 0.0 || !t0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "peakon parameters need finite E > 0 and finite t0, got E = {e}, t0 = {t0}"
            )));
        }
        Ok(PeakonParams { e, t0 })
    }

    /// Total conserved energy C = E^2.
    pub fn c(&self) -> f64 {
        self.e * self.e
    }

    /// Rescaling amplitude A = sqrt(2 C).
    pub fn a(&self) -> f64 {
        (2.0 * self.c()).sqrt()
    }

    /// Coefficients at time t; `beta` is undefined at the breaking time.
    pub fn coeffs(&self, t: f64) -> Result<Coeffs> {
        if t == self.t0 {
            return Err(Error::BetaUndefinedAtBreaking { t0: self.t0 });
        }
        let s = 0.5 * self.e * (t - self.t0);
        let (sh, ch) = (s.sinh(), s.cosh());
        Ok(Coeffs {
            alpha: 0.5 * self.e * sh,
            beta: self.e / sh,
            gamma: ch.ln(),
            alpha_t: 0.25 * self.e * self.e * ch,
            beta_t: -0.5 * self.e * self.e * ch / (sh * sh),
        })
    }

    /// Velocity u(t, x).
    pub fn u_exact(&self, t: f64, x: f64) -> f64 {
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => return 0.0,
        };
        if x <= -k.gamma {
            -k.alpha * x.exp()
        } else if x < k.gamma {
            k.beta * x.sinh()
        } else {
            k.alpha * (-x).exp()
        }
    }

    /// Absolutely continuous part of the energy measure, d mu_ac / dx.
    pub fn mu_density(&self, t: f64, x: f64) -> f64 {
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => return 0.0,
        };
        if x <= -k.gamma {
            2.0 * k.alpha * k.alpha * (2.0 * x).exp()
        } else if x < k.gamma {
            k.beta * k.beta * (2.0 * x).cosh()
        } else {
            2.0 * k.alpha * k.alpha * (-2.0 * x).exp()
        }
    }

    /// Point masses of the energy measure: one atom of mass C at the origin
    /// at the breaking time, none otherwise.
    pub fn atoms_exact(&self, t: f64) -> Vec<(f64, f64)> {
        if t == self.t0 {
            vec![(0.0, self.c())]
        } else {
            vec![]
        }
    }

    /// Cumulative energy F(t, x) = mu((-inf, x)), left-continuous.
    pub fn f_exact(&self, t: f64, x: f64) -> f64 {
        let c = self.c();
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => return if x <= 0.0 { 0.0 } else { c },
        };
        if x <= -k.gamma {
            let a2 = k.alpha * k.alpha;
            a2 * (2.0 * x).exp()
        } else if x < k.gamma {
            0.5 * c + 0.5 * k.beta * k.beta * (2.0 * x).sinh()
        } else {
            c - k.alpha * k.alpha * (-2.0 * x).exp()
        }
    }

    /// Pressure p(t, x).
    pub fn p_exact(&self, t: f64, x: f64) -> f64 {
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => return 0.25 * self.c() * (-x.abs()).exp(),
        };
        let a2 = k.alpha * k.alpha;
        if x <= -k.gamma {
            k.alpha_t * x.exp() - 0.5 * a2 * (2.0 * x).exp()
        } else if x < k.gamma {
            let chx = x.cosh();
            -k.beta_t * chx - 0.5 * k.beta * k.beta * chx * chx
        } else {
            k.alpha_t * (-x).exp() - 0.5 * a2 * (-2.0 * x).exp()
        }
    }

    /// Pressure gradient p_x(t, x); at the breaking time the sign(0) = 0
    /// convention makes p_x(t0, 0) = 0.
    pub fn px_exact(&self, t: f64, x: f64) -> f64 {
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => {
                let s = if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                return -0.25 * self.c() * s * (-x.abs()).exp();
            }
        };
        let a2 = k.alpha * k.alpha;
        if x <= -k.gamma {
            k.alpha_t * x.exp() - a2 * (2.0 * x).exp()
        } else if x < k.gamma {
            -k.beta_t * x.sinh() - 0.5 * k.beta * k.beta * (2.0 * x).sinh()
        } else {
            -k.alpha_t * (-x).exp() + a2 * (-2.0 * x).exp()
        }
    }

    /// G(t, x) = 2 p_x + 2 F, the strictly increasing relabeling function
    /// with range (0, 2C). At the breaking time it jumps by C across the
    /// origin, from C/2 to 3C/2; the value at x = 0 is the mid-jump value C,
    /// the sign(0) = 0 convention and also the limit of the smooth-time
    /// middle branch below.
    pub fn g_exact(&self, t: f64, x: f64) -> f64 {
        let c = self.c();
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => {
                return if x < 0.0 {
                    0.5 * c * x.exp()
                } else if x > 0.0 {
                    2.0 * c - 0.5 * c * (-x).exp()
                } else {
                    c
                };
            }
        };
        if x <= -k.gamma {
            2.0 * k.alpha_t * x.exp()
        } else if x < k.gamma {
            c - 2.0 * k.beta_t * x.sinh()
        } else {
            2.0 * c - 2.0 * k.alpha_t * (-x).exp()
        }
    }

    fn check_eta(&self, eta: f64) -> Result<f64> {
        let upper = 2.0 * self.c();
        if !(eta > 0.0 && eta < upper) {
            return Err(Error::EtaOutOfRange { eta, upper });
        }
        Ok(upper)
    }

    /// Pseudo-inverse Y(t, eta) = sup { x : G(t, x) < eta }, eta in (0, 2C).
    /// The three branches meet at eta = C/2 and eta = 3C/2; at the breaking
    /// time the middle branch degenerates to the plateau Y = 0.
    pub fn y_exact(&self, t: f64, eta: f64) -> Result<f64> {
        self.check_eta(eta)?;
        let c = self.c();
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => {
                return Ok(if eta <= 0.5 * c {
                    (2.0 * eta / c).ln()
                } else if eta < 1.5 * c {
                    0.0
                } else {
                    (0.5 * c / (2.0 * c - eta)).ln()
                });
            }
        };
        Ok(if eta <= 0.5 * c {
            (eta / (2.0 * k.alpha_t)).ln()
        } else if eta < 1.5 * c {
            ((c - eta) / (2.0 * k.beta_t)).asinh()
        } else {
            (2.0 * k.alpha_t / (2.0 * c - eta)).ln()
        })
    }

    /// Transformed velocity U(t, eta) = u(t, Y(t, eta)).
    pub fn u_of_eta(&self, t: f64, eta: f64) -> Result<f64> {
        self.check_eta(eta)?;
        let c = self.c();
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => return Ok(0.0),
        };
        Ok(if eta <= 0.5 * c {
            -0.5 * k.alpha / k.alpha_t * eta
        } else if eta < 1.5 * c {
            0.5 * k.beta / k.beta_t * (c - eta)
        } else {
            0.5 * k.alpha / k.alpha_t * (2.0 * c - eta)
        })
    }

    /// Transformed pressure P(t, eta) = p(t, Y(t, eta)).
    pub fn p_of_eta(&self, t: f64, eta: f64) -> Result<f64> {
        self.check_eta(eta)?;
        let c = self.c();
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => {
                return Ok(if eta <= 0.5 * c {
                    0.5 * eta
                } else if eta < 1.5 * c {
                    0.25 * c
                } else {
                    0.5 * (2.0 * c - eta)
                });
            }
        };
        let ratio2 = k.alpha * k.alpha / (8.0 * k.alpha_t * k.alpha_t);
        Ok(if eta <= 0.5 * c {
            0.5 * eta - ratio2 * eta * eta
        } else if eta < 1.5 * c {
            let w = 1.0 + (c - eta) * (c - eta) / (4.0 * k.beta_t * k.beta_t);
            -k.beta_t * w.sqrt() - 0.5 * k.beta * k.beta * w
        } else {
            let r = 2.0 * c - eta;
            0.5 * r - ratio2 * r * r
        })
    }

    /// d/d eta of the pseudo-inverse Y(t, .). One-sided limits only matter at
    /// the two branch points, which midpoint grids never hit exactly.
    pub fn y_eta_of_eta(&self, t: f64, eta: f64) -> Result<f64> {
        self.check_eta(eta)?;
        let c = self.c();
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => {
                return Ok(if eta <= 0.5 * c {
                    1.0 / eta
                } else if eta < 1.5 * c {
                    0.0
                } else {
                    1.0 / (2.0 * c - eta)
                });
            }
        };
        Ok(if eta <= 0.5 * c {
            1.0 / eta
        } else if eta < 1.5 * c {
            let z = (c - eta) / (2.0 * k.beta_t);
            -1.0 / (2.0 * k.beta_t) / (1.0 + z * z).sqrt()
        } else {
            1.0 / (2.0 * c - eta)
        })
    }

    /// d/d eta of U(t, .); piecewise constant in eta on each branch.
    pub fn u_eta_of_eta(&self, t: f64, eta: f64) -> Result<f64> {
        self.check_eta(eta)?;
        let c = self.c();
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => return Ok(0.0),
        };
        Ok(if eta > 0.5 * c && eta < 1.5 * c {
            -0.5 * k.beta / k.beta_t
        } else {
            -0.5 * k.alpha / k.alpha_t
        })
    }

    /// d/d eta of P(t, .).
    pub fn p_eta_of_eta(&self, t: f64, eta: f64) -> Result<f64> {
        self.check_eta(eta)?;
        let c = self.c();
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => {
                return Ok(if eta <= 0.5 * c {
                    0.5
                } else if eta < 1.5 * c {
                    0.0
                } else {
                    -0.5
                });
            }
        };
        let ratio = k.alpha * k.alpha / (4.0 * k.alpha_t * k.alpha_t);
        Ok(if eta <= 0.5 * c {
            0.5 - ratio * eta
        } else if eta < 1.5 * c {
            let w = 1.0 + (c - eta) * (c - eta) / (4.0 * k.beta_t * k.beta_t);
            let w_eta = -(c - eta) / (2.0 * k.beta_t * k.beta_t);
            -k.beta_t * w_eta / (2.0 * w.sqrt()) - 0.5 * k.beta * k.beta * w_eta
        } else {
            ratio * (2.0 * c - eta) - 0.5
        })
    }

    /// Rescaled derivative triple (Y~_eta, U~_eta, (P~^{1/2})_eta); every
    /// component picks up the same factor A^3 from the label change.
    pub fn scaled_slopes_exact(&self, t: f64, eta: f64) -> Result<(f64, f64, f64)> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::EtaOutOfRange { eta, upper: 1.0 });
        }
        let a = self.a();
        let raw = a * a * eta;
        let yd = self.y_eta_of_eta(t, raw)?;
        let ud = self.u_eta_of_eta(t, raw)?;
        let p = self.p_of_eta(t, raw)?.max(0.0);
        let pd = self.p_eta_of_eta(t, raw)?;
        let psd = if p > 0.0 { pd / (2.0 * p.sqrt()) } else { 0.0 };
        let a3 = a * a * a;
        Ok((a3 * yd, a3 * ud, a3 * psd))
    }

    /// Rescaled triple (Y~, U~, P~^{1/2}) on the unit interval:
    /// Y~(eta) = A Y(A^2 eta), U~ = A U, P~^{1/2} = A P^{1/2}, A = sqrt(2C).
    /// Branch points land at eta = 1/4 and 3/4 for every E.
    pub fn scaled_exact(&self, t: f64, eta: f64) -> Result<(f64, f64, f64)> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::EtaOutOfRange { eta, upper: 1.0 });
        }
        let a = self.a();
        let raw = a * a * eta;
        let y = self.y_exact(t, raw)?;
        let u = self.u_of_eta(t, raw)?;
        let p = self.p_of_eta(t, raw)?;
        Ok((a * y, a * u, a * p.max(0.0).sqrt()))
    }

    /// Exact L^2(R) norm of u(t, .).
    pub fn u_l2_exact(&self, t: f64) -> f64 {
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => return 0.0,
        };
        let tails = k.alpha * k.alpha * (-2.0 * k.gamma).exp();
        let mid = k.beta * k.beta * (0.5 * (2.0 * k.gamma).sinh() - k.gamma);
        (tails + mid).sqrt()
    }

    /// Sample the Eulerian fields on a kink-graded grid: three zones split
    /// at the peak locations -gamma, gamma. Half the cells cover the middle
    /// zone uniformly; each tail reaches 18 kernel lengths past its peak
    /// with geometrically growing cells, fine where the density is O(1) and
    /// coarse where it has decayed away. The peak nodes are duplicated with
    /// the one-sided density values (u_x jumps there, so the density does
    /// too). The sampled density is normalized so the trapezoid mass plus
    /// atoms equals C exactly; the correction is a uniform O(h^2) factor.
    pub fn sample_eulerian(&self, t: f64, n: usize) -> EulerianSnapshot {
        let k = match self.coeffs(t) {
            Ok(k) => k,
            Err(_) => return self.sample_eulerian_uniform(t, n, 18.0),
        };
        let n = n.max(8);
        let n_mid = ((n / 2) / 2 * 2).max(2);
        let n_side = ((n - n_mid) / 2).max(1);
        let span = 18.0;
        // Map j/n_side through (e^{q s} - 1)/(e^q - 1) so cell widths grow
        // by a factor e^q across the tail.
        let q = 4.0f64;
        let denom = q.exp_m1();
        let stretch = |s: f64| span * (q * s).exp_m1() / denom;
        let a2 = k.alpha * k.alpha;
        let tail = |xx: f64| 2.0 * a2 * (-2.0 * xx.abs()).exp();
        let mid = |xx: f64| k.beta * k.beta * (2.0 * xx).cosh();
        let mut x = Vec::with_capacity(n_mid + 2 * n_side + 3);
        let mut dens = Vec::with_capacity(n_mid + 2 * n_side + 3);
        for i in 0..=n_side {
            let s = 1.0 - i as f64 / n_side as f64;
            let xx = -k.gamma - stretch(s);
            x.push(xx);
            dens.push(tail(xx));
        }
        for i in 0..=n_mid {
            let f = i as f64 / n_mid as f64;
            let xx = -k.gamma + 2.0 * k.gamma * f;
            x.push(xx);
            dens.push(mid(xx));
        }
        for i in 0..=n_side {
            let s = i as f64 / n_side as f64;
            let xx = k.gamma + stretch(s);
            x.push(xx);
            dens.push(tail(xx));
        }
        self.finish_snapshot(t, x, dens)
    }

    /// Sample on the uniform grid [-l, l] with an even number of cells so
    /// the origin is a node, plus duplicated peak nodes carrying the
    /// one-sided density values. Same normalization as the graded grid.
    pub fn sample_eulerian_uniform(&self, t: f64, n: usize, l: f64) -> EulerianSnapshot {
        let n = n.max(8).div_ceil(2) * 2;
        let base: Vec<f64> = (0..=n)
            .map(|i| -l + 2.0 * l * (i as f64 / n as f64))
            .collect();
        let mut x = Vec::with_capacity(n + 5);
        let mut dens = Vec::with_capacity(n + 5);
        match self.coeffs(t) {
            Err(_) => {
                x = base;
                dens = vec![0.0; x.len()];
            }
            Ok(k) => {
                let a2 = k.alpha * k.alpha;
                let tail = |xx: f64| 2.0 * a2 * (-2.0 * xx.abs()).exp();
                let mid = |xx: f64| k.beta * k.beta * (2.0 * xx).cosh();
                let g = k.gamma;
                let kinks: Vec<f64> = if g < l { vec![-g, g] } else { vec![] };
                let mut ki = 0;
                for &xx in &base {
                    while ki < kinks.len() && kinks[ki] <= xx {
                        let kp = kinks[ki];
                        // Outer-side value first in position order.
                        let (first, second) = if kp < 0.0 {
                            (tail(kp), mid(kp))
                        } else {
                            (mid(kp), tail(kp))
                        };
                        x.push(kp);
                        dens.push(first);
                        x.push(kp);
                        dens.push(second);
                        ki += 1;
                    }
                    if ki > 0 && kinks[ki - 1] == xx {
                        continue;
                    }
                    x.push(xx);
                    dens.push(if xx < -g || xx > g { tail(xx) } else { mid(xx) });
                }
            }
        }
        self.finish_snapshot(t, x, dens)
    }

    fn finish_snapshot(&self, t: f64, x: Vec<f64>, mut dens: Vec<f64>) -> EulerianSnapshot {
        let u: Vec<f64> = x.iter().map(|&xi| self.u_exact(t, xi)).collect();
        let atoms = self.atoms_exact(t);
        let atom_mass: f64 = atoms.iter().map(|&(_, m)| m).sum();
        let w = grid::trapezoid_weights(&x);
        let raw: f64 = w.iter().zip(&dens).map(|(w, d)| w * d).sum();
        if raw > 0.0 {
            let scale = (self.c() - atom_mass) / raw;
            for d in &mut dens {
                *d *= scale;
            }
        }
        EulerianSnapshot {
            t,
            x,
            u,
            dens,
            atoms,
            c: self.c(),
        }
    }
}
