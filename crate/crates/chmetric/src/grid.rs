//! Grid utilities shared by every module: quadrature weights, discrete
//! derivatives, monotone interpolation, and the exponential-kernel prefix
//! sweeps that make all nonlocal operators O(N).

/// Composite trapezoid weights for an arbitrary increasing node grid.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    w[0] = 0.5 * (x[1] - x[0]);
    w[n - 1] = 0.5 * (x[n - 1] - x[n - 2]);
    for i in 1..n - 1 {
        w[i] = 0.5 * (x[i + 1] - x[i - 1]);
    }
    w
}

/// Midpoints (k - 1/2) * upper / n for k = 1..=n.
pub fn midpoint_grid(n: usize, upper: f64) -> Vec<f64> {
    let h = upper / n as f64;
    (0..n).map(|k| (k as f64 + 0.5) * h).collect()
}

/// Midpoint-rule L2 norm on (0, upper) with n uniform cells.
pub fn l2_midpoint(f: &[f64], upper: f64) -> f64 {
    let h = upper / f.len() as f64;
    (f.iter().map(|v| v * v).sum::<f64>() * h).sqrt()
}

/// Centered differences on a (possibly nonuniform) grid, one-sided at ends.
pub fn centered_slopes(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = (f[1] - f[0]) / (x[1] - x[0]);
    d[n - 1] = (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2]);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (x[i + 1] - x[i - 1]);
    }
    d
}

/// Centered differences on a uniform grid with a one-sided fallback where
/// the slope jumps. Piecewise-smooth fields (branch kinks at fixed interior
/// points) keep second order in the smooth parts and avoid averaging across
/// a derivative discontinuity, at the price of first order on the two nodes
/// flanking each kink.
pub fn kink_aware_slopes(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return centered_slopes(&(0..n).map(|i| i as f64 * h).collect::<Vec<_>>(), f);
    }
    d[0] = (f[1] - f[0]) / h;
    d[n - 1] = (f[n - 1] - f[n - 2]) / h;
    for i in 1..n - 1 {
        let sl = (f[i] - f[i - 1]) / h;
        let sr = (f[i + 1] - f[i]) / h;
        // A genuine kink makes the local second difference comparable to the
        // first differences themselves; smooth data keeps it O(h) smaller.
        let d2 = (sr - sl).abs();
        if d2 > 0.5 * (sl.abs() + sr.abs()) && d2 > 1e-14 {
            // Pick the side whose own stencil is smoother.
            let curv_l = if i >= 2 {
                (f[i] - 2.0 * f[i - 1] + f[i - 2]).abs()
            } else {
                f64::INFINITY
            };
            let curv_r = if i + 2 < n {
                (f[i + 2] - 2.0 * f[i + 1] + f[i]).abs()
            } else {
                f64::INFINITY
            };
            d[i] = if curv_l <= curv_r { sl } else { sr };
        } else {
            d[i] = 0.5 * (sl + sr);
        }
    }
    d
}

/// Second-order one-sided slopes on a uniform grid:
/// (-3 f_i + 4 f_{i+1} - f_{i+2}) / (2h) when `forward`, its mirror
/// otherwise, switching to the opposite stencil at the edge where the
/// preferred one runs out of points. Taking the better of the forward and
/// backward residuals lets pointwise identities be tested right across
/// derivative kinks, where any centered stencil mixes the two sides.
pub fn oneside_slopes(f: &[f64], h: f64, forward: bool) -> Vec<f64> {
    let n = f.len();
    if n < 3 {
        return centered_slopes(&(0..n).map(|i| i as f64 * h).collect::<Vec<_>>(), f);
    }
    let fwd = |i: usize| (-3.0 * f[i] + 4.0 * f[i + 1] - f[i + 2]) / (2.0 * h);
    let bwd = |i: usize| (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h);
    (0..n)
        .map(|i| {
            if forward {
                if i + 2 < n {
                    fwd(i)
                } else {
                    bwd(i)
                }
            } else if i >= 2 {
                bwd(i)
            } else {
                fwd(i)
            }
        })
        .collect()
}

/// Index of the last xs[i] <= x (xs sorted ascending); None if x < xs[0].
pub fn bracket(xs: &[f64], x: f64) -> Option<usize> {
    if xs.is_empty() || x < xs[0] {
        return None;
    }
    let mut lo = 0usize;
    let mut hi = xs.len();
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Piecewise-linear interpolation with constant extension outside the grid.
pub fn linear_interp(xs: &[f64], fs: &[f64], x: f64) -> f64 {
    match bracket(xs, x) {
        None => fs[0],
        Some(i) if i + 1 >= xs.len() => fs[xs.len() - 1],
        Some(i) => {
            let dx = xs[i + 1] - xs[i];
            if dx <= 0.0 {
                fs[i]
            } else {
                fs[i] + (fs[i + 1] - fs[i]) * (x - xs[i]) / dx
            }
        }
    }
}

/// Running maximum; turns a nearly-monotone sample into a monotone one
/// without moving values more than the local noise level.
pub fn cummax(v: &mut [f64]) {
    for i in 1..v.len() {
        if v[i] < v[i - 1] {
            v[i] = v[i - 1];
        }
    }
}

/// One pass of the exponential-kernel prefix sums against nondecreasing
/// positions y with rate r > 0:
///
///   left[i]  = sum_{j <= i} w[j] * exp(r * (y[j] - y[i]))
///   right[i] = sum_{j >= i} w[j] * exp(r * (y[i] - y[j]))
///
/// Every transfer factor exp(r * (y[i-1] - y[i])) is <= 1 because y is
/// nondecreasing, so the recurrences neither overflow nor lose the leading
/// digits; this replaces explicit max-shifting of the exponents.
pub fn exp_sweep(y: &[f64], w: &[f64], r: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    assert_eq!(n, w.len());
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    if n == 0 {
        return (left, right);
    }
    left[0] = w[0];
    for i in 1..n {
        left[i] = left[i - 1] * (r * (y[i - 1] - y[i])).exp() + w[i];
    }
    right[n - 1] = w[n - 1];
    for i in (0..n - 1).rev() {
        right[i] = right[i + 1] * (r * (y[i] - y[i + 1])).exp() + w[i];
    }
    (left, right)
}

/// Direct O(N^2) evaluation of the same sums; the reference the sweeps are
/// verified against.
pub fn exp_sweep_direct(y: &[f64], w: &[f64], r: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    for i in 0..n {
        for j in 0..=i {
            left[i] += w[j] * (r * (y[j] - y[i])).exp();
        }
        for j in i..n {
            right[i] += w[j] * (r * (y[i] - y[j])).exp();
        }
    }
    (left, right)
}

/// Full-kernel sum sum_j w[j] e^{-r|y_i - y_j|} from one sweep pass
/// (the diagonal term appears in both prefix sums, so subtract it once).
pub fn kernel_sum(left: &[f64], right: &[f64], w: &[f64]) -> Vec<f64> {
    (0..w.len()).map(|i| left[i] + right[i] - w[i]).collect()
}

/// Signed kernel sum sum_j sign(i - j) w[j] e^{-r|y_i - y_j|} with
/// sign(0) = 0; the diagonal cancels between the two prefix sums.
pub fn kernel_sum_signed(left: &[f64], right: &[f64]) -> Vec<f64> {
    (0..left.len()).map(|i| left[i] - right[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let x = [0.0, 0.5, 1.25, 2.0];
        let w = trapezoid_weights(&x);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn midpoints_cover_interval() {
        let g = midpoint_grid(4, 2.0);
        assert_eq!(g, vec![0.25, 0.75, 1.25, 1.75]);
    }

    #[test]
    fn sweep_matches_direct_on_random_data() {
        let n = 257;
        let y: Vec<f64> = (0..n)
            .map(|i| (i as f64 * 0.03).sin().abs() + i as f64 * 0.01)
            .scan(0.0, |acc, v| {
                *acc += v * 0.01;
                Some(*acc)
            })
            .collect();
        let w: Vec<f64> = (0..n)
            .map(|i| ((i * 7 + 3) % 11) as f64 * 0.1 - 0.3)
            .collect();
        let (l1, r1) = exp_sweep(&y, &w, 1.7);
        let (l2, r2) = exp_sweep_direct(&y, &w, 1.7);
        for i in 0..n {
            assert!(
                (l1[i] - l2[i]).abs() <= 1e-12 * l2[i].abs().max(1.0),
                "left {i}"
            );
            assert!(
                (r1[i] - r2[i]).abs() <= 1e-12 * r2[i].abs().max(1.0),
                "right {i}"
            );
        }
    }

    #[test]
    fn sweep_handles_wide_positions_without_overflow() {
        // Positions spanning +-800 overflow e^{|y|}; the shifted recurrence
        // must stay finite.
        let y: Vec<f64> = (0..101).map(|i| -800.0 + 16.0 * i as f64).collect();
        let w = vec![1.0; 101];
        let (l, r) = exp_sweep(&y, &w, 1.0);
        assert!(l.iter().all(|v| v.is_finite()));
        assert!(r.iter().all(|v| v.is_finite()));
        // Far-apart nodes barely couple: each sum is close to its own weight.
        assert!((l[50] - 1.0).abs() < 1e-6);
        assert!((r[50] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kink_aware_slope_is_one_sided_at_a_corner() {
        // f = |x - 0.5| on a uniform grid: slopes are -1 then +1.
        let n = 101;
        let h = 0.01;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h - 0.5).abs()).collect();
        let d = kink_aware_slopes(&f, h);
        // At the kink node the fallback picks one of the true one-sided
        // slopes rather than the centered average 0.
        assert!((d[50].abs() - 1.0).abs() < 1e-12);
        // Away from the kink plain centered differences survive.
        assert!((d[20] + 1.0).abs() < 1e-12);
        assert!((d[80] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oneside_slopes_are_second_order() {
        let n = 41;
        let h = 1.0 / (n - 1) as f64;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
        let df = oneside_slopes(&f, h, true);
        let db = oneside_slopes(&f, h, false);
        for i in 0..n {
            let x = i as f64 * h;
            // Quadratics are differenced exactly; for x^3 the error is
            // exactly h^2 f'''/3 = 2 h^2 for these stencils.
            assert!((df[i] - 3.0 * x * x).abs() < 2.1 * h * h, "fwd at {i}");
            assert!((db[i] - 3.0 * x * x).abs() < 2.1 * h * h, "bwd at {i}");
        }
    }

    #[test]
    fn interp_is_exact_on_linear_data() {
        let xs = [0.0, 1.0, 3.0];
        let fs = [1.0, 3.0, 7.0];
        assert_eq!(linear_interp(&xs, &fs, 0.5), 2.0);
        assert_eq!(linear_interp(&xs, &fs, 2.0), 5.0);
        assert_eq!(linear_interp(&xs, &fs, -1.0), 1.0);
        assert_eq!(linear_interp(&xs, &fs, 9.0), 7.0);
    }
}
