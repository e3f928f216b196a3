use mclass::fnmodel::*;
use mclass::karamata::*;
use mclass::order::{classify, DEFAULT_TOL};
use mclass::{ClassLabel, FunctionHandle, GridSpec};
use proptest::prelude::*;

fn members() -> Vec<(FunctionHandle, f64)> {
    vec![
        (make_power_tail(-2.0), -2.0),
        (make_peter_paul(), -1.0),
        (make_two_plus_sin(), 0.0),
        (make_log_perturbed_power(-1.0), -1.0),
        (make_ramp(1.0).unwrap(), 1.0),
    ]
}

fn long_grid() -> GridSpec {
    GridSpec::new(1.0, 300.0)
}

// the V integral of index r - 1 grows like x^(r + rho), the W integral decays
// that way; the constant in log V makes convergence 1/log x, hence the long grid
#[test]
fn cumulative_integrals_change_index_by_r() {
    let g = long_grid();
    for (u, rho) in members() {
        for r in [-1.0, 0.5, 1.0, 3.0] {
            let s = r + rho;
            if s.abs() < 0.25 {
                continue;
            }
            let kind = if s > 0.0 { CumulativeKind::V } else { CumulativeKind::W };
            let c = cumulative_integral(&u, kind, r - 1.0, 2.0, &g).unwrap();
            let label = classify(&c.to_handle().unwrap(), &g, DEFAULT_TOL).unwrap();
            assert!(
                label.agrees_with(&ClassLabel::M { rho: s }, DEFAULT_TOL),
                "{} r = {r}: {label}",
                u.name()
            );
        }
    }
}

#[test]
fn theorem_branches_hold_across_the_corpus() {
    let g = long_grid();
    for (u, rho) in members() {
        for s in [-1.5, 0.0, 1.5] {
            let r = s - rho;
            let rep = karamata_theorem_report(&u, r, 2.0, &g, DEFAULT_TOL).unwrap();
            assert!(rep.passed, "{} r = {r}: {:?}", u.name(), rep);
        }
    }
}

#[test]
fn divergent_tail_is_rejected() {
    let u = make_power_tail(-0.5);
    let err = cumulative_integral(&u, CumulativeKind::W, 0.0, 2.0, &GridSpec::default()).unwrap_err();
    assert!(matches!(err, mclass::Error::DivergentTail { .. }), "{err}");
}

#[test]
fn representation_of_slowly_varying_members() {
    let g = long_grid();
    for u in [make_two_plus_sin(), make_log_perturbed_power(0.0)] {
        let rep = extract_representation(&u, 2.0, &g).unwrap();
        let report = verify_representation(&u, &rep, &g, DEFAULT_TOL).unwrap();
        assert!(report.passed, "{}: {report:?}", u.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn peter_paul_integral_matches_quadrature(lx in 2.5f64..18.0, a in 0u32..2) {
        let x = 2f64.powf(lx);
        let b = 2f64.powi(a as i32);
        prop_assume!(x > 2.0 * b);
        let g = GridSpec::new(x.log10() - 0.5, x.log10()).with_points(256);
        let c = cumulative_integral(&make_peter_paul(), CumulativeKind::V, 0.0, b, &g).unwrap();
        let (&xe, &lv) = (c.xs.last().unwrap(), c.log_values.last().unwrap());
        let n = xe.log2().floor() as u32;
        prop_assume!(a < n);
        let exact = peter_paul_partial_integral(xe, a).unwrap();
        prop_assert!((lv.exp() - exact).abs() <= 1e-8 * exact, "{} vs {exact}", lv.exp());
    }

    #[test]
    fn power_representation_reconstructs(alpha in -3.0f64..3.0) {
        let u = make_power_tail(alpha);
        let g = GridSpec::default();
        let rep = extract_representation(&u, 2.0, &g).unwrap();
        for &x in [10.0, 1e3, 1e7].iter() {
            let back = rep.alpha(x).unwrap() + rep.eps(x).unwrap() * rep.integral(x).unwrap();
            prop_assert!((back - u.eval_log(x).unwrap()).abs() <= 1e-7 * (1.0 + x.ln()));
        }
    }
}
