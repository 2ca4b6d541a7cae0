use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::ConstructionResult;

pub const CSV_HEADER: &str =
    "stage,mixed,coefficient,next_total,totality_segment,alpha_segment,t_raw,t,alpha_bit,d_at_beta,running_bound,evaluated";

impl ConstructionResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for t in &self.traces {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                t.s,
                t.mixed,
                t.coefficient,
                t.next_total,
                t.totality_segment.to_token(),
                t.alpha_segment.to_token(),
                t.t_raw,
                t.t,
                t.alpha_bit,
                t.d_at_beta,
                t.running_bound,
                t.evaluated
            )
            .expect("write to string");
        }
        out
    }
}

/// Writes `beta.txt`, `trace.csv` and `mixture.txt` into `dir`.
pub fn write_outputs(result: &ConstructionResult, dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("beta.txt"), format!("{}\n", result.beta.to_token()))?;
    std::fs::write(dir.join("trace.csv"), result.trace_csv())?;
    std::fs::write(dir.join("mixture.txt"), result.mixture_description())?;
    Ok(())
}
