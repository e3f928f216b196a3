//! Acceptance criteria, one test per criterion. Each prints a single
//! PASS/FAIL line with the measured values and the elapsed time.

use mclass::algebra::{compose, convolve, predicted_class, product, reciprocal, scale_add, OpKind, QuadratureConfig};
use mclass::evt::*;
use mclass::fnmodel::*;
use mclass::karamata::*;
use mclass::order::*;
use mclass::tauberian::*;
use mclass::{ClassLabel, FunctionHandle, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

// criteria run one at a time so the runtime limits measure the criterion alone
static SERIAL: Mutex<()> = Mutex::new(());

const INDEX_TOL: f64 = 0.05;
const KAPPA_TOL: f64 = 0.06;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    start: Instant,
    notes: Vec<String>,
    ok: bool,
}

impl Criterion {
    fn new(id: u32, name: &'static str, limit_secs: u64) -> Self {
        Criterion {
            id,
            name,
            limit: Duration::from_secs(limit_secs),
            start: Instant::now(),
            notes: Vec::new(),
            ok: true,
        }
    }

    fn check(&mut self, ok: bool, note: String) {
        if !ok {
            self.ok = false;
            self.notes.push(format!("FAILED {note}"));
        } else {
            self.notes.push(note);
        }
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        let in_time = elapsed < self.limit;
        self.ok &= in_time;
        println!(
            "criterion {} [{}]: {} in {:.2}s (limit {}s){}",
            self.id,
            self.name,
            if self.ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            self.limit.as_secs(),
            if in_time { "" } else { " over time" }
        );
        for n in &self.notes {
            println!("    {n}");
        }
        assert!(self.ok, "criterion {} failed", self.id);
    }
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn long_grid() -> GridSpec {
    GridSpec::new(1.0, 300.0)
}

#[test]
fn criterion_1_index_recovery() {
    let _g = lock();
    let mut c = Criterion::new(1, "index recovery", 5);
    let grid = GridSpec::default();
    let kcfg = KappaConfig::default();
    for alpha in [-3.0, -1.0, 0.0, 2.0] {
        let u = make_power_tail(alpha);
        let label = classify(&u, &grid, INDEX_TOL).unwrap();
        let rho = label.rho();
        c.check(
            rho.is_some_and(|r| (r - alpha).abs() <= INDEX_TOL),
            format!("alpha {alpha}: class {label}"),
        );
        let k = estimate_kappa(&u, &kcfg).unwrap().value;
        c.check((k + alpha).abs() <= KAPPA_TOL, format!("alpha {alpha}: kappa {k}"));
    }
    c.finish();
}

#[test]
fn criterion_2_peter_paul() {
    let _g = lock();
    let mut c = Criterion::new(2, "Peter-and-Paul suite", 10);
    let pp = make_peter_paul();
    let grid = GridSpec::default();
    let label = classify(&pp, &grid, INDEX_TOL).unwrap();
    c.check(
        label.rho().is_some_and(|r| (r + 1.0).abs() <= INDEX_TOL),
        format!("class {label} on grid to 1e8"),
    );
    let (rv, _) = rv_ratio_test(&pp, &RV_T_VALUES, &grid, INDEX_TOL).unwrap();
    c.check(matches!(rv, RvVerdict::NotRv { .. }), format!("rv test {rv:?}"));
    let k = estimate_kappa(&pp, &KappaConfig::default()).unwrap().value;
    c.check((k - 1.0).abs() <= KAPPA_TOL, format!("kappa {k}"));
    let k3 = karamata_theorem_report(&pp, 1.0, 2.0, &long_grid(), INDEX_TOL).unwrap();
    c.check(
        k3.condition == mclass::report::ConditionId::K3 && k3.passed,
        format!("{} passed={} (b=2, r=1, grid to 1e300)", k3.condition, k3.passed),
    );
    let g = GridSpec::new(4f64.log10(), 20.0 * 2f64.log10());
    let v = cumulative_integral(&pp, CumulativeKind::V, 0.0, 2.0, &g).unwrap();
    let worst = v
        .xs
        .iter()
        .zip(&v.log_values)
        .map(|(&x, l)| {
            let exact = peter_paul_partial_integral(x, 1).unwrap();
            (l.exp() - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    c.check(worst <= 1e-6, format!("partial integral worst relative error {worst:.2e} over {} points", v.xs.len()));
    c.finish();
}

#[test]
fn criterion_3_oset_detection() {
    let _g = lock();
    let mut c = Criterion::new(3, "O-set detection", 10);
    let grid = GridSpec::default();
    let geo = classify_detailed(&make_oset_geometric(1.0, 0.0, 2.0).unwrap(), &grid, INDEX_TOL).unwrap();
    c.check(
        (0.45..=0.55).contains(&geo.mu.value) && (0.95..=1.05).contains(&geo.nu.value),
        format!("oset_geometric(1,0,2): mu {} nu {}", geo.mu.value, geo.nu.value),
    );
    let tower = classify_detailed(&make_oset_tower(1.0, -1.0).unwrap(), &grid, INDEX_TOL).unwrap();
    c.check(
        (tower.nu.value + 1.0).abs() <= INDEX_TOL && tower.mu.value == f64::NEG_INFINITY,
        format!("oset_tower(1,-1): mu {} nu {}", tower.mu.value, tower.nu.value),
    );
    c.finish();
}

fn algebra_pool() -> Vec<(&'static str, FunctionHandle, bool)> {
    // (label, handle, usable in convolutions)
    vec![
        ("power(-3)", make_power_tail(-3.0), true),
        ("power(-2)", make_power_tail(-2.0), true),
        ("power(-1.5)", make_power_tail(-1.5), true),
        ("power(-0.5)", make_power_tail(-0.5), true),
        ("power(0)", make_power_tail(0.0), true),
        ("power(1)", make_power_tail(1.0), true),
        ("power(2)", make_power_tail(2.0), true),
        ("pareto(2)", make_pareto_tail(2.0).unwrap(), true),
        ("exp_neg", make_exp_neg(1.0).unwrap(), true),
        ("exp_pos", make_exp_pos(1.0).unwrap(), true),
        ("peter_paul", make_peter_paul(), false),
        ("two_plus_sin", make_two_plus_sin(), false),
        ("log_perturbed(-1)", make_log_perturbed_power(-1.0), false),
        ("ramp_log_sine", make_ramp_log_sine(1.5, 0.1).unwrap(), false),
    ]
}

fn label_of(h: &FunctionHandle) -> ClassLabel {
    h.truth().map(|t| t.class).unwrap_or(ClassLabel::Undecided)
}

#[test]
fn criterion_4_algebra_closure() {
    let _g = lock();
    let mut c = Criterion::new(4, "algebra closure", 60);
    let grid = GridSpec::default();
    let qcfg = QuadratureConfig::default();
    let pool = algebra_pool();
    let by = |n: &str| pool.iter().find(|p| p.0 == n).unwrap().1.clone();
    let mut cases: Vec<(String, OpKind, Vec<FunctionHandle>, Option<f64>)> = vec![
        ("power(-3) * power(-2)".into(), OpKind::Convolve, vec![by("power(-3)"), by("power(-2)")], None),
        ("power(-0.5) * power(-0.5)".into(), OpKind::Convolve, vec![by("power(-0.5)"), by("power(-0.5)")], None),
        ("power(-3) * power(2)".into(), OpKind::Convolve, vec![by("power(-3)"), by("power(2)")], None),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let ops = [OpKind::ScaleAdd, OpKind::Product, OpKind::Reciprocal, OpKind::Convolve, OpKind::Compose];
    let inner: Vec<&str> = vec!["power(1)", "power(2)", "ramp_log_sine"];
    while cases.len() < 20 {
        let op = ops[rng.gen_range(0..ops.len())];
        let (a, b) = (rng.gen_range(0..pool.len()), rng.gen_range(0..pool.len()));
        let (x, y) = (&pool[a], &pool[b]);
        let (name, operands, scale) = match op {
            OpKind::Reciprocal => (format!("1/{}", x.0), vec![x.1.clone()], None),
            OpKind::ScaleAdd => {
                let s = [0.5, 2.0, 3.0][rng.gen_range(0..3)];
                (format!("{s}·{} + {}", x.0, y.0), vec![x.1.clone(), y.1.clone()], Some(s))
            }
            OpKind::Product => (format!("{} · {}", x.0, y.0), vec![x.1.clone(), y.1.clone()], None),
            OpKind::Convolve => {
                if !(x.2 && y.2) {
                    continue;
                }
                (format!("{} * {}", x.0, y.0), vec![x.1.clone(), y.1.clone()], None)
            }
            OpKind::Compose => {
                let i = inner[rng.gen_range(0..inner.len())];
                (format!("{} ∘ {i}", x.0), vec![x.1.clone(), by(i)], None)
            }
        };
        let labels: Vec<ClassLabel> = operands.iter().map(label_of).collect();
        if !predicted_class(op, &labels, scale).unwrap().is_decided() {
            continue;
        }
        cases.push((name, op, operands, scale));
    }
    let mut regimes = [false; 3];
    for (name, op, operands, scale) in &cases {
        let labels: Vec<ClassLabel> = operands.iter().map(label_of).collect();
        let predicted = predicted_class(*op, &labels, *scale).unwrap();
        let built = match op {
            OpKind::Reciprocal => Ok(reciprocal(&operands[0])),
            OpKind::ScaleAdd => scale_add(scale.unwrap(), &operands[0], &operands[1]),
            OpKind::Product => Ok(product(&operands[0], &operands[1])),
            OpKind::Convolve => convolve(&operands[0], &operands[1], &qcfg),
            OpKind::Compose => compose(&operands[0], &operands[1]),
        };
        let found = built.and_then(|h| classify(&h, &grid, INDEX_TOL));
        let agree = found.as_ref().is_ok_and(|f| f.agrees_with(&predicted, INDEX_TOL));
        if *op == OpKind::Convolve && agree {
            if let (Some(r1), Some(r2)) = (labels[0].rho(), labels[1].rho()) {
                match (r1 < -1.0, r2 < -1.0) {
                    (true, true) => regimes[0] = true,
                    (false, false) => regimes[1] = true,
                    _ => regimes[2] = true,
                }
            }
        }
        c.check(agree, format!("{name}: predicted {predicted}, found {found:?}"));
    }
    c.check(regimes.iter().all(|r| *r), format!("convolution regimes covered {regimes:?}"));
    c.finish();
}

#[test]
fn criterion_5_representation() {
    let _g = lock();
    let mut c = Criterion::new(5, "representation", 10);
    let grid = long_grid();
    let members = [
        make_power_tail(-3.0),
        make_power_tail(-1.0),
        make_power_tail(0.0),
        make_power_tail(2.0),
        make_peter_paul(),
        make_two_plus_sin(),
        make_pareto_tail(2.0).unwrap(),
        make_log_perturbed_power(-1.0),
        make_ramp(1.0).unwrap(),
        make_ramp_log_sine(1.5, 0.1).unwrap(),
    ];
    for u in &members {
        let rep = extract_representation(u, 2.0, &grid).unwrap();
        let r = verify_representation(u, &rep, &grid, INDEX_TOL).unwrap();
        let res = r.get("reconstruction_residual").unwrap();
        c.check(
            r.passed && res <= 1e-7,
            format!(
                "{} {:?}: residual {res:.1e}, beta [{:.4}, {:.4}], eps [{:.4}, {:.4}], alpha/log x [{:.4}, {:.4}]",
                u.name(),
                u.params(),
                r.get("beta_lower").unwrap(),
                r.get("beta_upper").unwrap(),
                r.get("eps_lower").unwrap(),
                r.get("eps_upper").unwrap(),
                r.get("alpha_over_log_lower").unwrap(),
                r.get("alpha_over_log_upper").unwrap()
            ),
        );
    }
    let dgrid = GridSpec::default();
    for u in [
        make_exp_neg(1.0).unwrap(),
        make_exp_pos(1.0).unwrap(),
        make_floor_log_tail(),
        make_remark7_mix(),
    ] {
        let rep = extract_representation_inf(&u, 2.0, &dgrid).unwrap();
        let r = verify_representation_inf(&rep, &dgrid).unwrap();
        c.check(
            r.passed,
            format!("{}: alpha/log x at grid end {:.3e}", u.name(), r.get("alpha_over_log_at_end").unwrap()),
        );
    }
    c.finish();
}

#[test]
fn criterion_6_tauberian() {
    let _g = lock();
    let mut c = Criterion::new(6, "Tauberian", 30);
    let grid = GridSpec::default();
    let cfg = TransformConfig::default();
    for alpha in [0.5, 1.0, 2.0, 3.0] {
        let u = make_ramp(alpha).unwrap();
        let r = tauberian_check(&u, &cfg, &grid, INDEX_TOL).unwrap();
        c.check(r.passed, format!("ramp {alpha}: transform index {}", r.get("rho_transform").unwrap()));
    }
    for (alpha, exact) in [(1.0, (|s: f64| 1.0 / s) as fn(f64) -> f64), (2.0, |s: f64| 2.0 / (s * s))] {
        let u = make_ramp(alpha).unwrap();
        let worst = transform_on_grid(&u, &cfg)
            .unwrap()
            .into_iter()
            .map(|(s, l)| (l.exp() - exact(s)).abs() / exact(s))
            .fold(0.0, f64::max);
        c.check(worst <= 1e-6, format!("ramp {alpha}: worst relative error {worst:.2e} over the s grid"));
    }
    c.finish();
}

#[test]
fn criterion_7_evt() {
    let _g = lock();
    let mut c = Criterion::new(7, "EVT", 30);
    let grid = GridSpec::default();
    let pareto = DistributionHandle::new(make_pareto_tail(2.0).unwrap()).unwrap();
    let vm1 = von_mises_frechet(&pareto, &grid, FIRST_STEP).unwrap().value;
    c.check((vm1 - 2.0).abs() <= 0.01, format!("vM1 pareto(2): {vm1}"));
    let k = estimate_kappa(&pareto.base, &KappaConfig::default()).unwrap().value;
    c.check((k - 0.5).abs() <= KAPPA_TOL, format!("kappa of pareto(2) tail {k}, required 1/2"));

    let da = classify_domain_attraction(&pareto, &grid, INDEX_TOL).unwrap();
    c.check(
        matches!(da.verdict, DomainVerdict::Frechet { alpha } if (alpha - 2.0).abs() <= INDEX_TOL),
        format!("pareto(2): {}", da.verdict),
    );
    let pp = DistributionHandle::new(make_peter_paul()).unwrap();
    let da = classify_domain_attraction(&pp, &grid, INDEX_TOL).unwrap();
    c.check(
        da.verdict == DomainVerdict::NotClassified && da.label.agrees_with(&ClassLabel::M { rho: -1.0 }, INDEX_TOL),
        format!("peter_paul: {} with {}", da.verdict, da.label),
    );
    let fl = DistributionHandle::new(make_floor_log_tail()).unwrap();
    let da = classify_domain_attraction(&fl, &grid, INDEX_TOL).unwrap();
    c.check(
        da.verdict == DomainVerdict::NotClassified && da.label == ClassLabel::MInf,
        format!("floor_log_tail: {} with {}", da.verdict, da.label),
    );

    let u_grid = geometric_grid(grid.x_min(), grid.x_max(), 400);
    let probes = [0.5, 1.0, 2.0, 3.0, 5.0];
    let half = AFunction::new("u/2", |u| u / 2.0);
    let r = gpd_ratio_probe(&pareto, GpdSpec { xi: 0.5 }, &[half], &probes, &u_grid, 0.01).unwrap();
    c.check(
        r.passed,
        format!(
            "PBdH pareto(2), a(u)=u/2: spread {:.1e}, deviation from G_1/2 {:.1e}",
            r.get("spread[u/2]").unwrap(),
            r.get("deviation[u/2]").unwrap()
        ),
    );
    for h in [make_oset_geometric(1.0, -2.0, 2.0).unwrap(), make_oset_tower(1.0, -1.0).unwrap()] {
        let d = DistributionHandle::new(h).unwrap();
        let family = default_a_family(1.0);
        let r = gpd_ratio_probe(&d, GpdSpec { xi: 0.5 }, &family, &probes, &u_grid, 0.01).unwrap();
        let spreads: Vec<f64> = family.iter().map(|a| r.get(&format!("spread[{}]", a.name)).unwrap()).collect();
        c.check(
            !r.passed && spreads.iter().all(|s| *s > 0.1),
            format!("PBdH {}: spreads {spreads:?}", d.base.name()),
        );
    }
    c.finish();
}

#[test]
fn criterion_8_simulation() {
    let _g = lock();
    let mut c = Criterion::new(8, "simulation", 60);
    let reps = 2000;
    let d = DistributionHandle::new(make_pareto_tail(1.0).unwrap()).unwrap();
    let s = block_maxima_simulate(&d, &[10_000], reps, 7, &NormRule::FrechetStandard, Some(1.0)).unwrap();
    let ks = s.distances[0].unwrap();
    c.check(ks < 0.05, format!("KS to Frechet(1): {ks:.4}"));
    let bound = 3.0 / (reps as f64).sqrt();
    let worst = s
        .abscissae
        .iter()
        .zip(&s.empirical_cdfs[0])
        .map(|(&x, e)| (e - normalized_max_cdf(&d, 10_000, s.a_n[0], s.b_n[0], x)).abs())
        .fold(0.0, f64::max);
    c.check(worst <= bound, format!("worst gap to F^n(a_n x): {worst:.4} (bound {bound:.4})"));
    let pp = DistributionHandle::new(make_peter_paul()).unwrap();
    let w = subsequence_witness(&pp, &[10, 14, 18], reps, 7).unwrap();
    c.check(
        w.ks_empirical.iter().all(|k| *k >= 0.05),
        format!("peter_paul 2^k vs 3·2^k: empirical KS {:?}, exact {:?}", w.ks_empirical, w.ks_exact),
    );
    c.finish();
}

fn mclass(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mclass")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn criterion_9_cli_contract() {
    let _g = lock();
    let mut c = Criterion::new(9, "CLI contract", 60);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,value\n10,1\n5,2\n20,3\n30,4\n40,5\n50,6\n60,7\n70,8\n").unwrap();
    let bad = bad.to_str().unwrap();
    let expected: [(&[&str], i32); 5] = [
        (&["classify", "--fn", "power_tail", "--param", "alpha=-2"], 0),
        (&["classify", "--fn", "power_tail", "--fn", "peter_paul"], 1),
        (&["classify", "--data", bad], 2),
        (&["classify", "--fn", "oset_tower", "--param", "c=1.5", "--param", "alpha=1"], 3),
        (&["simulate", "--fn", "pareto_tail", "--param", "alpha=0.01", "--seed", "1"], 4),
    ];
    for (args, want) in expected {
        let (code, _) = mclass(args);
        c.check(code == want, format!("exit {code} (want {want}) for {}", args.join(" ")));
    }
    let args = ["simulate", "--fn", "pareto_tail", "--param", "alpha=1", "--n", "10000", "--reps", "2000", "--seed", "7"];
    let (_, first) = mclass(&args);
    let (_, second) = mclass(&args);
    c.check(first == second && !first.is_empty(), format!("byte-identical simulate output ({} bytes)", first.len()));
    let doc = mclass_cli::document::ReportDocument::from_json(&first).unwrap();
    c.check(doc.to_json() == first, "JSON round trip reproduces the document".into());
    let (_, rep) = mclass(&["report", "--fn", "peter_paul", "--r", "1", "--b", "2"]);
    let doc = mclass_cli::document::ReportDocument::from_json(&rep).unwrap();
    c.check(doc.to_json() == rep, "JSON round trip of a report with infinities".into());
    c.finish();
}
