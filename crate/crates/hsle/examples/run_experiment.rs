//! Running a registered experiment from code. Pass an id (default:
//! `sle-variance`) and optionally an ensemble size.

use hsle::harness::{execute, ExperimentSpec, EXPERIMENTS};

fn main() -> hsle::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "sle-variance".into());
    if id == "list" {
        for (id, what) in EXPERIMENTS {
            println!("{id:22} {what}");
        }
        return Ok(());
    }
    let mut spec = ExperimentSpec::new(&id);
    if let Some(n) = args.next() {
        spec = spec.with_ensemble(n.parse().map_err(|_| hsle::Error::Domain(format!("bad ensemble size {n}")))?);
    }
    let out = execute(&spec)?;
    for c in &out.report.checks {
        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.describe());
    }
    println!("{} rows of data, {:.1} s", out.data.rows.len(), out.report.runtime_secs);
    Ok(())
}
