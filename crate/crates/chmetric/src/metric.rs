//! Distance between rescaled solution triples.
//!
//! Two conservative solutions are compared through their rescaled
//! pseudo-inverse representations on the common unit interval:
//!
//!   d = ||Y1 - Y2||_L2 + ||U1 - U2||_L2 + ||P1^{1/2} - P2^{1/2}||_L2
//!       + |A1 - A2|,
//!
//! with all norms over eta in [0, 1]. Solutions of different total energy
//! live on the same grid after rescaling, which is what makes the
//! cross-energy comparison meaningful; the |A1 - A2| term then remembers
//! the energies themselves. Along the flow the distance grows at most
//! exponentially, and `fitted_rate` extracts the observed exponent from a
//! sampled series.

use crate::error::{Error, Result};
use crate::grid;
use crate::transform::ScaledSnapshot;
use serde::Serialize;

/// One distance evaluation, split by component.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DistanceBreakdown {
    #[serde(rename = "dY")]
    pub d_y: f64,
    #[serde(rename = "dU")]
    pub d_u: f64,
    #[serde(rename = "dP")]
    pub d_p: f64,
    #[serde(rename = "dA")]
    pub d_a: f64,
    pub total: f64,
}

/// L2 norm of the difference of two midpoint-grid samplings of [0, 1].
pub fn l2_gap(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(grid::l2_midpoint(&diff, 1.0))
}

/// Distance between two scaled snapshots on equal grids.
pub fn distance(x: &ScaledSnapshot, y: &ScaledSnapshot) -> Result<DistanceBreakdown> {
    let d_y = l2_gap(&x.y, &y.y)?;
    let d_u = l2_gap(&x.u, &y.u)?;
    let d_p = l2_gap(&x.psqrt, &y.psqrt)?;
    let d_a = (x.a - y.a).abs();
    Ok(DistanceBreakdown {
        d_y,
        d_u,
        d_p,
        d_a,
        total: d_y + d_u + d_p + d_a,
    })
}

/// Distances between paired snapshot series, tagged by the first series'
/// times.
pub fn distance_series(
    xs: &[ScaledSnapshot],
    ys: &[ScaledSnapshot],
) -> Result<Vec<(f64, DistanceBreakdown)>> {
    if xs.len() != ys.len() {
        return Err(Error::GridMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    xs.iter()
        .zip(ys)
        .map(|(x, y)| Ok((x.t, distance(x, y)?)))
        .collect()
}

/// Max-slope growth estimate of a sampled distance series: the smallest
/// K >= 0 with d(t) <= e^{K (t - t_first)} d(t_first) at every sample,
/// namely max over later samples of (ln d(t) - ln d(t_first)) / (t - t_first).
/// A series that starts at zero distance (or shrinks throughout) fits K = 0;
/// zero samples after a positive start are skipped rather than fitted.
pub fn fitted_rate(series: &[(f64, DistanceBreakdown)]) -> f64 {
    let Some(&(t_first, ref first)) = series.first() else {
        return 0.0;
    };
    let d_first = first.total;
    if d_first <= 0.0 {
        return 0.0;
    }
    let mut rate = 0.0f64;
    for &(t, ref d) in &series[1..] {
        if d.total > 0.0 && t > t_first {
            rate = rate.max((d.total / d_first).ln() / (t - t_first));
        }
    }
    rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peakon::PeakonParams;
    use crate::transform::zero_scaled;
    use proptest::prelude::*;

    fn snap(vals: [(f64, f64, f64); 4], a: f64) -> ScaledSnapshot {
        ScaledSnapshot {
            t: 0.0,
            eta: grid::midpoint_grid(4, 1.0),
            y: vals.iter().map(|v| v.0).collect(),
            u: vals.iter().map(|v| v.1).collect(),
            psqrt: vals.iter().map(|v| v.2).collect(),
            a,
        }
    }

    #[test]
    fn distance_between_nearby_energies_matches_frozen_values() {
        let p1 = PeakonParams { e: 2.0, t0: 2.0 };
        let p2 = PeakonParams { e: 2.2, t0: 2.0 };
        let n = 4096;
        for (t, want_y, want_u, want_p, want_a, want_total) in [
            (
                0.0,
                1.034_222_823_609_194,
                0.35374156120008663,
                0.334_863_396_065_659_9,
                0.282_842_712_474_619,
                2.0056704933495595,
            ),
            (
                3.0,
                0.523_361_899_394_266_9,
                0.33804531953158695,
                0.40378299750564194,
                0.282_842_712_474_619,
                1.5480329289061148,
            ),
        ] {
            let a = p1.scaled_snapshot_exact(t, n).unwrap();
            let b = p2.scaled_snapshot_exact(t, n).unwrap();
            let d = distance(&a, &b).unwrap();
            for (got, want) in [
                (d.d_y, want_y),
                (d.d_u, want_u),
                (d.d_p, want_p),
                (d.d_a, want_a),
                (d.total, want_total),
            ] {
                assert!((got - want).abs() <= 1e-9 * want, "t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn peakon_keeps_unit_scale_distance_from_zero() {
        let pk = PeakonParams { e: 2.0, t0: 2.0 };
        let n = 4096;
        let a = pk.scaled_snapshot_exact(1.0, n).unwrap();
        let z = zero_scaled(n);
        let d = distance(&a, &z).unwrap();
        for (got, want) in [
            (d.d_y, 3.529040183858846),
            (d.d_u, 1.2436779005268533),
            (d.d_p, 2.1592564320232276),
            (d.d_a, 2.8284271247461901),
        ] {
            assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
        }
        // The scale term alone keeps the pair at least A apart even as the
        // Eulerian L2 gap between the same two solutions vanishes at
        // breaking.
        assert!(d.total >= pk.a());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let pk = PeakonParams { e: 2.0, t0: 2.0 };
        let a = pk.scaled_snapshot_exact(1.0, 64).unwrap();
        let b = pk.scaled_snapshot_exact(1.0, 128).unwrap();
        assert!(matches!(distance(&a, &b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn fitted_rate_recovers_exponent_of_synthetic_series() {
        let mk = |d: f64| DistanceBreakdown {
            d_y: d,
            d_u: 0.0,
            d_p: 0.0,
            d_a: 0.0,
            total: d,
        };
        let series: Vec<(f64, DistanceBreakdown)> = (0..20)
            .map(|j| (0.1 * j as f64, mk((0.3 * 0.1 * j as f64).exp())))
            .collect();
        let rate = fitted_rate(&series);
        assert!((rate - 0.3).abs() < 1e-9, "rate {rate}");
    }

    proptest! {
        #[test]
        fn metric_axioms_on_random_triples(
            raw in proptest::collection::vec(-5.0f64..5.0, 36),
            a1 in 0.0f64..4.0,
            a2 in 0.0f64..4.0,
            a3 in 0.0f64..4.0,
        ) {
            let take = |off: usize, a: f64| {
                let mut vals = [(0.0, 0.0, 0.0); 4];
                for k in 0..4 {
                    vals[k] = (raw[off + k], raw[off + 4 + k], raw[off + 8 + k].abs());
                }
                snap(vals, a)
            };
            let x = take(0, a1);
            let y = take(12, a2);
            let z = take(24, a3);
            let dxy = distance(&x, &y).unwrap().total;
            let dyx = distance(&y, &x).unwrap().total;
            let dxz = distance(&x, &z).unwrap().total;
            let dyz = distance(&y, &z).unwrap().total;
            let dxx = distance(&x, &x).unwrap().total;
            prop_assert!(dxy >= 0.0);
            prop_assert!(dxx == 0.0);
            prop_assert!((dxy - dyx).abs() <= 1e-12 * (1.0 + dxy));
            prop_assert!(dxz <= dxy + dyz + 1e-12 * (1.0 + dxz));
        }
    }
}
