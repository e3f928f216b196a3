use crate::document::*;
use crate::plots::emit_plot_data;
use crate::args::{ClassifyArgs, CommonArgs, ReportArgs, SimulateArgs};
use mclass::evt::{
    block_maxima_simulate, classify_domain_attraction, subsequence_witness, von_mises_frechet, DistributionHandle,
    DomainVerdict, NormRule, FIRST_STEP, RV_T_VALUES,
};
use mclass::karamata::{
    extract_representation, extract_representation_inf, karamata_theorem_report, verify_representation,
    verify_representation_inf,
};
use mclass::order::{
    check_second_characterization, classify_detailed, estimate_kappa_traced, rv_ratio_test, Classification,
    KappaConfig, KappaProbe,
};
use mclass::report::ConditionId;
use mclass::tauberian::{anchored, tauberian_check, TransformConfig};
use mclass::{fnmodel, ClassLabel, ConditionReport, Error, FunctionHandle, GridSpec, IndexEstimate, TableData};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_UNDECIDED: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

/// Reps from which an explicit seed is mandatory.
pub const SEED_REQUIRED_REPS: usize = 1000;
/// Default block size for `simulate`.
pub const DEFAULT_N: u64 = 10_000;
/// Default Karamata exponents for `report`.
pub const DEFAULT_R: [f64; 4] = [-1.0, 0.5, 1.0, 3.0];
/// log10 of the upper end of the grid used by representation and Karamata checks.
pub const CONDITION_XMAX: f64 = 300.0;
const WITNESS_K: [u32; 3] = [10, 14, 18];

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: m.into(),
        }
    }
    fn data(m: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DATA,
            message: m.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Param(_) | Error::UnknownName(_) | Error::Arity { .. } => EXIT_USAGE,
            Error::Format(_) | Error::PositivityViolation { .. } => EXIT_DATA,
            _ => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

struct Loaded {
    handle: FunctionHandle,
    input: InputDescriptor,
}

fn load(c: &CommonArgs) -> Result<Loaded, Failure> {
    let params: BTreeMap<String, f64> = c.params.iter().cloned().collect();
    if let Some(name) = &c.input.name {
        let handle = fnmodel::make_named(name, &params)?;
        return Ok(Loaded {
            input: InputDescriptor::Named {
                name: name.clone(),
                params: handle.params().clone(),
            },
            handle,
        });
    }
    let path = c.input.data.as_ref().expect("clap enforces one input");
    if !params.is_empty() {
        return Err(Failure::usage("--param only applies to --fn"));
    }
    let bytes = fs::read(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::data(format!("{}: not UTF-8", path.display())))?;
    let data = TableData::from_csv(&text).map_err(|e| Failure::data(e.to_string()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "table".into());
    let handle = fnmodel::from_table_named(&name, &data).map_err(|e| Failure::data(e.to_string()))?;
    Ok(Loaded {
        handle,
        input: InputDescriptor::File {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        },
    })
}

fn grid_of(c: &CommonArgs, h: &FunctionHandle) -> Result<GridSpec, Failure> {
    let g = GridSpec::new(c.xmin, c.xmax).with_points(c.points);
    g.validate()?;
    if !(c.tol > 0.0) {
        return Err(Failure::usage(format!("--tol must be positive, got {}", c.tol)));
    }
    if g.x_max() > h.range_ceiling() {
        return Err(Failure::data(format!(
            "grid end {:e} beyond the last table abscissa {:e}",
            g.x_max(),
            h.range_ceiling()
        )));
    }
    Ok(g)
}

fn condition_grid(c: &CommonArgs, h: &FunctionHandle) -> GridSpec {
    let top = CONDITION_XMAX.min(h.range_ceiling().log10()).max(c.xmax);
    GridSpec::new(c.xmin, top).with_points(c.points)
}

fn rho_estimate(cl: &Classification) -> Option<IndexEstimate> {
    cl.label.rho().map(|rho| IndexEstimate {
        value: rho,
        raw: 0.5 * (cl.mu.raw + cl.nu.raw),
        spread: cl.nu.value - cl.mu.value,
        trend: cl.nu.trend,
        grid: cl.nu.grid,
    })
}

struct Base {
    loaded: Loaded,
    grid: GridSpec,
    classification: Classification,
    kappa: Option<IndexEstimate>,
    trace: Vec<KappaProbe>,
    kcfg: KappaConfig,
}

fn base(c: &CommonArgs) -> Result<Base, Failure> {
    let loaded = load(c)?;
    let grid = grid_of(c, &loaded.handle)?;
    let classification = classify_detailed(&loaded.handle, &grid, c.tol)?;
    let kcfg = KappaConfig::default();
    let (kappa, trace) = match estimate_kappa_traced(&loaded.handle, &kcfg) {
        Ok(k) => (Some(k.estimate), k.trace),
        Err(Error::UndecidedConvergence { .. }) => (None, Vec::new()),
        Err(e) => return Err(e.into()),
    };
    Ok(Base {
        loaded,
        grid,
        classification,
        kappa,
        trace,
        kcfg,
    })
}

fn document(c: &CommonArgs, command: &str, b: &Base) -> ReportDocument {
    ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        command: command.into(),
        input: b.loaded.input.clone(),
        class: b.classification.label,
        estimates: Estimates {
            mu: b.classification.mu,
            nu: b.classification.nu,
            kappa: b.kappa,
            rho: rho_estimate(&b.classification),
        },
        conditions: Vec::new(),
        evt: None,
        provenance: Provenance {
            grid: b.grid,
            condition_grid: None,
            kappa: b.kcfg,
            transform: None,
            tol: c.tol,
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").into(),
        },
    }
}

fn finish(c: &CommonArgs, b: &Base, doc: &ReportDocument) -> Outcome {
    if let Some(dir) = &c.plots {
        emit_plot_data(dir, &b.loaded.handle, &b.grid, &b.trace).map_err(Failure::data)?;
    }
    let json = doc.to_json();
    match &c.out {
        Some(p) => fs::write(p, json).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?,
        None => print!("{json}"),
    }
    Ok(if doc.class.is_decided() { EXIT_OK } else { EXIT_UNDECIDED })
}

pub fn run_classify(a: &ClassifyArgs) -> Outcome {
    let b = base(&a.common)?;
    let doc = document(&a.common, "classify", &b);
    finish(&a.common, &b, &doc)
}

fn failed(id: ConditionId, tol: f64, e: &Error) -> ConditionReport {
    ConditionReport::new(id, false, tol).detail(e.to_string())
}

fn evt_domain(u: &FunctionHandle, grid: &GridSpec, tol: f64, conditions: &mut Vec<ConditionReport>) -> Result<Option<EvtSection>, Failure> {
    if !u.is_tail() {
        return Ok(None);
    }
    let d = DistributionHandle::new(u.clone())?;
    if d.endpoint.is_finite() {
        return Ok(None);
    }
    if u.is_smooth() {
        let est = von_mises_frechet(&d, grid, FIRST_STEP)?;
        conditions.push(
            ConditionReport::new(ConditionId::Vm1, est.value.is_finite() && est.value > 0.0, tol)
                .with("limit", est.value)
                .with("spread", est.spread),
        );
    }
    let domain = classify_domain_attraction(&d, grid, tol)?;
    Ok(Some(EvtSection {
        domain: Some(domain),
        simulation: None,
        witness: None,
    }))
}

pub fn run_report(a: &ReportArgs) -> Outcome {
    let c = &a.common;
    let b = base(c)?;
    let mut doc = document(c, "report", &b);
    if !b.classification.label.is_decided() {
        return finish(c, &b, &doc);
    }
    if !(a.b > 1.0) {
        return Err(Failure::usage(format!("--b must exceed 1, got {}", a.b)));
    }
    let u = &b.loaded.handle;
    let cg = condition_grid(c, u);
    doc.provenance.condition_grid = Some(cg);
    let mut conds = Vec::new();
    match b.classification.label {
        ClassLabel::M { .. } => {
            let rep = match extract_representation(u, a.b, &cg) {
                Ok(rep) => verify_representation(u, &rep, &cg, c.tol)?,
                Err(e @ Error::SingularDenominator { .. }) => failed(ConditionId::RepLimits, c.tol, &e),
                Err(e) => return Err(e.into()),
            };
            conds.push(rep);
            conds.push(check_second_characterization(u, &b.grid, &b.kcfg)?);
            let rs: Vec<f64> = if a.r.is_empty() { DEFAULT_R.to_vec() } else { a.r.clone() };
            for r in rs {
                match karamata_theorem_report(u, r, a.b, &cg, c.tol) {
                    Ok(k) => conds.push(k),
                    Err(e @ Error::DivergentTail { .. }) => conds.push(failed(ConditionId::K2, c.tol, &e).with("r", r)),
                    Err(e) => return Err(e.into()),
                }
            }
        }
        ClassLabel::MInf | ClassLabel::MNegInf => {
            let rep = extract_representation_inf(u, a.b, &b.grid)?;
            conds.push(verify_representation_inf(&rep, &b.grid)?);
        }
        _ => {}
    }
    conds.push(rv_ratio_test(u, &RV_T_VALUES, &b.grid, c.tol)?.1);
    if a.tauberian {
        let tcfg = TransformConfig::default();
        doc.provenance.transform = Some(tcfg);
        match tauberian_check(&anchored(u), &tcfg, &b.grid, c.tol) {
            Ok(r) => conds.push(r),
            Err(e @ (Error::ClassMismatch { .. } | Error::Precondition(_))) => {
                conds.push(failed(ConditionId::Tauberian, c.tol, &e))
            }
            Err(e) => return Err(e.into()),
        }
    }
    doc.evt = evt_domain(u, &b.grid, c.tol, &mut conds)?;
    doc.conditions = conds;
    finish(c, &b, &doc)
}

pub fn run_simulate(a: &SimulateArgs) -> Outcome {
    let c = &a.common;
    if a.reps >= SEED_REQUIRED_REPS && a.seed.is_none() {
        return Err(Failure::usage(format!("--seed is required when --reps >= {SEED_REQUIRED_REPS}")));
    }
    if a.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let seed = a.seed.unwrap_or(0);
    let loaded = load(c)?;
    if !loaded.handle.is_tail() {
        return Err(Failure::data(format!("{} is not a distribution tail", loaded.handle.name())));
    }
    let b = base(c)?;
    let d = DistributionHandle::new(b.loaded.handle.clone())?;
    let mut doc = document(c, "simulate", &b);
    doc.provenance.seed = Some(seed);
    let mut conds = Vec::new();
    let mut section = match evt_domain(&d.base, &b.grid, c.tol, &mut conds)? {
        Some(s) => s,
        None => return Err(Failure::data("simulation needs a tail with infinite endpoint")),
    };
    let alpha = match section.domain.as_ref().map(|r| r.verdict) {
        Some(DomainVerdict::Frechet { alpha }) => Some(alpha),
        _ => None,
    };
    let ns: Vec<u64> = if a.n.is_empty() { vec![DEFAULT_N] } else { a.n.clone() };
    section.simulation = Some(block_maxima_simulate(&d, &ns, a.reps, seed, &NormRule::FrechetStandard, alpha)?);
    if a.subsequences {
        section.witness = Some(subsequence_witness(&d, &WITNESS_K, a.reps, seed)?);
    }
    doc.conditions = conds;
    doc.evt = Some(section);
    finish(c, &b, &doc)
}
