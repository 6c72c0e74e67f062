//! The instability table: vanishing initial data, growing terminal density and
//! agreement of the two nonlinear solvers, written as CSV to stdout.

use zakharov_lab::experiments::{run_theorem, write_theorem_csv, ExperimentConfig};

fn main() -> zakharov_lab::Result<()> {
    let cfg = ExperimentConfig {
        k_list: vec![32, 64, 128],
        ..ExperimentConfig::default()
    };
    let table = run_theorem(&cfg)?;
    write_theorem_csv(&table.report.rows, std::io::stdout())?;
    if let Some((a, b)) = table.quarter_power_fit {
        eprintln!("terminal ‖n‖ ≈ {a:.4} + {b:.4}·k^(1/4)");
    }
    for w in &table.report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
