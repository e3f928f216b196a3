use mclass::evt::RV_T_VALUES;
use mclass::order::KappaProbe;
use mclass::{FunctionHandle, GridSpec};
use std::fs;
use std::path::Path;

fn writer(dir: &Path, name: &str) -> csv::Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(dir.join(name))
}

/// Writes `orders.csv`, `kappa_trace.csv` and `ratio.csv` into `dir`.
pub fn emit_plot_data(
    dir: &Path,
    u: &FunctionHandle,
    grid: &GridSpec,
    kappa_trace: &[KappaProbe],
) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let wrap = |e: csv::Error| format!("{}: {e}", dir.display());

    let mut w = writer(dir, "orders.csv").map_err(wrap)?;
    w.write_record(["x", "log_u_over_log_x"]).map_err(wrap)?;
    for x in grid.xs() {
        let v = u.raw_log(x) / x.ln();
        w.write_record([x.to_string(), v.to_string()]).map_err(wrap)?;
    }
    w.flush().map_err(|e| e.to_string())?;

    let mut w = writer(dir, "kappa_trace.csv").map_err(wrap)?;
    w.write_record(["r", "verdict", "last_log_partial"]).map_err(wrap)?;
    for p in kappa_trace {
        w.write_record([p.r.to_string(), format!("{:?}", p.tag), p.last_log_partial.to_string()])
            .map_err(wrap)?;
    }
    w.flush().map_err(|e| e.to_string())?;

    let mut w = writer(dir, "ratio.csv").map_err(wrap)?;
    w.write_record(["t", "x", "ratio"]).map_err(wrap)?;
    for t in RV_T_VALUES {
        for x in grid.xs() {
            if x * t > u.range_ceiling() || x * t <= u.support_floor() {
                continue;
            }
            let r = (u.raw_log(x * t) - u.raw_log(x)).exp();
            w.write_record([t.to_string(), x.to_string(), r.to_string()]).map_err(wrap)?;
        }
    }
    w.flush().map_err(|e| e.to_string())?;
    Ok(())
}
