//! The acceptance gate: seven checks, one printed pass/fail line each, all
//! tolerances taken from `chmetric::tol`. Every check runs even if an
//! earlier one fails; the test asserts at the end so the full scoreboard is
//! always visible with `--nocapture`.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chmetric::dynamics::{compute_operators, compute_operators_direct};
use chmetric::experiments::{
    self, FigureConfig, FigureId, LipschitzConfig, SuiteConfig, FIGURE_IDS,
};
use chmetric::grid::midpoint_grid;
use chmetric::metric::distance;
use chmetric::transform::zero_scaled;
use chmetric::{tol, PeakonParams, ScaledSnapshot};

struct Scoreboard {
    lines: Vec<(String, bool)>,
}

impl Scoreboard {
    fn new() -> Self {
        Scoreboard { lines: Vec::new() }
    }

    fn record(&mut self, label: &str, pass: bool, detail: String) {
        println!(
            "criterion {label}: {} ({detail})",
            if pass { "PASS" } else { "FAIL" }
        );
        self.lines.push((label.to_string(), pass));
    }

    fn finish(self) {
        let failed: Vec<String> = self
            .lines
            .iter()
            .filter(|(_, p)| !p)
            .map(|(l, _)| l.clone())
            .collect();
        assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
    }
}

#[test]
fn acceptance() {
    let mut board = Scoreboard::new();
    transform_agreement(&mut board);
    system_residual(&mut board);
    evolution_through_breaking(&mut board);
    inequality_catalog(&mut board);
    metric_axioms_and_lipschitz(&mut board);
    figure_reproduction(&mut board);
    algorithmic_equivalence(&mut board);
    board.finish();
}

/// 1: numerically transformed snapshots match the closed forms on the full
/// (E, t) grid at N = 4096, with the gap shrinking under grid doubling.
fn transform_agreement(board: &mut Scoreboard) {
    let study = experiments::run_transform(&SuiteConfig::default()).expect("study runs");
    let worst = study.cells.iter().map(|c| c.sup_gap).fold(0.0f64, f64::max);
    let shrink = study
        .cells
        .iter()
        .map(|c| c.shrink)
        .fold(f64::INFINITY, f64::min);
    board.record(
        "1 transform agreement",
        study.pass,
        format!(
            "sup gap {worst:.3e} <= {:.0e}, min shrink {shrink:.2} >= {}",
            tol::ORACLE_TRANSFORM_SUP,
            tol::ORACLE_TRANSFORM_SHRINK
        ),
    );
}

/// 2: the exact solution satisfies the rescaled evolution system with a
/// small discrete residual that decays when the grid refines.
fn system_residual(board: &mut Scoreboard) {
    let study =
        experiments::run_residual(2.0, 2.0, 3.0, 1e-4, &[1024, 2048, 4096]).expect("study runs");
    let last = study.rows.last().expect("rows");
    let min_shrink = study.shrink.iter().fold(f64::INFINITY, |m, &s| m.min(s));
    board.record(
        "2 system residual",
        study.pass,
        format!(
            "finest N residuals ({:.2e}, {:.2e}, {:.2e}) <= {:.0e}, shrink {min_shrink:.2} >= {}",
            last.resid_y,
            last.resid_u,
            last.resid_p,
            tol::RESIDUAL_REL_L2,
            tol::RESIDUAL_SHRINK
        ),
    );
}

/// 3: Lagrangian characteristics cross the breaking time and land on the
/// closed form with conserved energy and a stable compatibility relation.
fn evolution_through_breaking(board: &mut Scoreboard) {
    let report = experiments::run_evolve(2.0, 2.0, 1.0, 3.0, 1e-3, 1024).expect("evolution runs");
    board.record(
        "3 evolution through breaking",
        report.pass,
        format!(
            "sup|u| gap {:.2e} <= {:.0e}, energy drift {:.2e} <= {:.0e}, relation growth {:.2}x <= {}x",
            report.sup_u_gap,
            tol::EVOLVE_SUP_U,
            report.energy_drift_rel,
            tol::EVOLVE_ENERGY_DRIFT,
            report.relation_max / report.relation_initial.max(f64::MIN_POSITIVE),
            tol::XAVIER_GROWTH
        ),
    );
}

/// 4: every row of the inequality catalog holds across the (E, t) grid with
/// margin no worse than the tolerance relative to its A-power scale.
fn inequality_catalog(board: &mut Scoreboard) {
    let report = experiments::run_invariants(&SuiteConfig::default()).expect("suite runs");
    // Bounded-constant rows report a fitted constant instead of a margin, so
    // they are excluded from the margin aggregate.
    let worst_margin = report
        .worst
        .iter()
        .filter(|r| r.constant.is_none())
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    let worst_constant = report
        .worst
        .iter()
        .filter_map(|r| r.constant)
        .fold(0.0f64, f64::max);
    board.record(
        "4 inequality catalog",
        report.pass,
        format!(
            "{} rows, worst margin {worst_margin:.2e} >= {:.0e}, bounded-row constant {worst_constant:.3} <= {}",
            report.worst.len(),
            tol::CATALOG_MARGIN,
            tol::R_CONSTANT_CAP
        ),
    );
}

fn random_scaled(rng: &mut ChaCha8Rng, n: usize) -> ScaledSnapshot {
    if rng.gen_ratio(1, 10) {
        return zero_scaled(n);
    }
    let e = rng.gen_range(0.5..4.0);
    let t0 = rng.gen_range(-1.0..3.0);
    let t = t0 + rng.gen_range(-2.0..2.0);
    let pk = PeakonParams::new(e, t0).expect("valid parameters");
    pk.scaled_snapshot_exact(t, n).expect("exact snapshot")
}

/// 5: pseudometric axioms hold exactly on random triples, and the distance
/// along the flow stays under its fitted exponential envelope, is stable
/// under refinement, and separates the peakon from the zero solution.
fn metric_axioms_and_lipschitz(board: &mut Scoreboard) {
    let mut rng = ChaCha8Rng::seed_from_u64(20260818);
    let n = 256;
    let mut axioms = true;
    for _ in 0..100 {
        let (x, y, z) = (
            random_scaled(&mut rng, n),
            random_scaled(&mut rng, n),
            random_scaled(&mut rng, n),
        );
        let dxy = distance(&x, &y).expect("distance");
        let dyx = distance(&y, &x).expect("distance");
        let dxx = distance(&x, &x).expect("distance");
        let dxz = distance(&x, &z).expect("distance");
        let dyz = distance(&y, &z).expect("distance");
        axioms &= dxx.total == 0.0;
        axioms &= dxy.total == dyx.total;
        axioms &= dxy.total >= (x.a - y.a).abs();
        axioms &= dxz.total <= dxy.total + dyz.total + tol::AXIOM_SLACK;
    }
    let study = experiments::run_lipschitz(&LipschitzConfig::default()).expect("study runs");
    let pass = axioms && study.pass;
    let max_rate = study.pairs.iter().map(|p| p.rate).fold(0.0f64, f64::max);
    board.record(
        "5 metric axioms and Lipschitz bound",
        pass,
        format!(
            "axioms on 100 triples {}, pairs certified {}, max fitted K {max_rate:.3}, contrast floor {:.2} >= {:.2}",
            if axioms { "exact" } else { "broken" },
            study.pairs.iter().all(|p| p.pass),
            study.contrast.min_distance,
            study.contrast.amplitude
        ),
    );
}

fn check_figure_file(id: FigureId, cfg: &FigureConfig, t: f64, path: &Path) -> (usize, f64) {
    let text = fs::read_to_string(path).expect("figure file readable");
    let pk = PeakonParams::new(cfg.e, cfg.t0).expect("params");
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for line in text.lines().skip(1) {
        let mut parts = line.splitn(3, ',');
        let coord: f64 = parts.next().unwrap().parse().expect("coordinate parses");
        let value: f64 = parts.next().unwrap().parse().expect("value parses");
        let tag = parts.next().unwrap();
        let exact = match id {
            FigureId::VelocityX if tag == "atom" => {
                let atoms = pk.atoms_exact(t);
                atoms
                    .iter()
                    .find(|(loc, _)| *loc == coord)
                    .expect("atom location")
                    .1
            }
            FigureId::CumulativeG | FigureId::PressureX | FigureId::PressureSqrtX
                if tag == "atom" =>
            {
                let atoms = pk.atoms_exact(t);
                atoms
                    .iter()
                    .find(|(loc, _)| *loc == coord)
                    .expect("atom location")
                    .1
            }
            FigureId::VelocityX => pk.u_exact(t, coord),
            FigureId::CumulativeG => pk.g_exact(t, coord),
            FigureId::PressureX => pk.p_exact(t, coord),
            FigureId::PressureSqrtX => pk.p_exact(t, coord).max(0.0).sqrt(),
            FigureId::InverseY => pk.y_exact(t, coord).expect("in range"),
            FigureId::InverseU => pk.u_of_eta(t, coord).expect("in range"),
            FigureId::InverseP => pk.p_of_eta(t, coord).expect("in range"),
            FigureId::InversePsqrt => pk.p_of_eta(t, coord).expect("in range").max(0.0).sqrt(),
            FigureId::ScaledY => pk.scaled_exact(t, coord).expect("in range").0,
            FigureId::ScaledU => pk.scaled_exact(t, coord).expect("in range").1,
            FigureId::ScaledP => {
                let ps = pk.scaled_exact(t, coord).expect("in range").2;
                ps * ps
            }
            FigureId::ScaledPsqrt => pk.scaled_exact(t, coord).expect("in range").2,
            FigureId::Rescaling => {
                let c: f64 = tag
                    .strip_prefix('C')
                    .and_then(|rest| rest.split('-').next())
                    .expect("rescaling tag")
                    .parse()
                    .expect("energy parses");
                let fam = PeakonParams::new(c.sqrt(), cfg.t0).expect("params");
                fam.scaled_exact(t, coord).expect("in range").0
            }
        };
        let gap = (value - exact).abs() / exact.abs().max(1.0);
        worst = worst.max(gap);
        checked += 1;
    }
    (checked, worst)
}

/// 6: the emitted figure CSVs reproduce the closed forms to roundoff for
/// all thirteen curve families at the four pinned times.
fn figure_reproduction(board: &mut Scoreboard) {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = FigureConfig::default();
    let mut files = 0usize;
    let mut rows = 0usize;
    let mut worst = 0.0f64;
    for name in FIGURE_IDS {
        let id = FigureId::parse(name).expect("known id");
        let written = experiments::emit_figures(id, &cfg, dir.path()).expect("figures emit");
        assert_eq!(
            written.len(),
            cfg.times.len(),
            "one file per time for {}",
            id.as_str()
        );
        for (path, &t) in written.iter().zip(&cfg.times) {
            let (checked, gap) = check_figure_file(id, &cfg, t, path);
            assert!(checked >= cfg.n, "{} rows in {}", checked, path.display());
            files += 1;
            rows += checked;
            worst = worst.max(gap);
        }
    }
    board.record(
        "6 figure reproduction",
        worst <= tol::FIGURE_TOL,
        format!(
            "{files} files, {rows} rows, worst gap {worst:.2e} <= {:.0e}",
            tol::FIGURE_TOL
        ),
    );
}

fn random_admissible(rng: &mut ChaCha8Rng, n: usize) -> ScaledSnapshot {
    let a = rng.gen_range(0.5..3.0f64);
    let mut acc = -rng.gen_range(0.0..4.0);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        acc += rng.gen_range(0.0..0.05);
        y.push(acc);
    }
    let u: Vec<f64> = (0..n).map(|_| a * rng.gen_range(-0.7..0.7)).collect();
    // Pressure above the kinetic part keeps 2P - U^2 positive, as for real
    // states.
    let psqrt: Vec<f64> = u
        .iter()
        .map(|&v| (0.5 * v * v + rng.gen_range(0.05..1.0)).sqrt())
        .collect();
    ScaledSnapshot {
        t: 0.0,
        eta: midpoint_grid(n, 1.0),
        y,
        u,
        psqrt,
        a,
    }
}

/// 7: the linear-time kernel sweeps agree with direct quadratic summation
/// on random monotone states, and one operator evaluation stays inside the
/// time budget at N = 100000.
fn algorithmic_equivalence(board: &mut Scoreboard) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(32..=512);
        let snap = random_admissible(&mut rng, n);
        let fast = compute_operators(&snap);
        let slow = compute_operators_direct(&snap);
        for k in 0..n {
            for (x, y) in [
                (fast.d[k], slow.d[k]),
                (fast.e[k], slow.e[k]),
                (fast.q[k], slow.q[k]),
                (fast.s[k], slow.s[k]),
                (fast.r[k], slow.r[k]),
                (fast.v[k], slow.v[k]),
            ] {
                worst = worst.max((x - y).abs() / (1.0 + x.abs().max(y.abs())));
            }
        }
    }
    let big = PeakonParams::new(2.0, 2.0)
        .expect("params")
        .scaled_snapshot_exact(3.0, tol::SWEEP_BIG_N)
        .expect("snapshot");
    let start = Instant::now();
    let ops = compute_operators(&big);
    let seconds = start.elapsed().as_secs_f64();
    let finite = ops
        .q
        .iter()
        .chain(&ops.s)
        .chain(&ops.r)
        .all(|v| v.is_finite());
    let pass = worst <= tol::SWEEP_EQUIV_REL && seconds <= tol::SWEEP_SECONDS && finite;
    board.record(
        "7 algorithmic equivalence",
        pass,
        format!(
            "worst sweep gap {worst:.2e} <= {:.0e}, N = {} sweep in {seconds:.3}s <= {}s",
            tol::SWEEP_EQUIV_REL,
            tol::SWEEP_BIG_N,
            tol::SWEEP_SECONDS
        ),
    );
}
