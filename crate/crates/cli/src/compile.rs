//! The `compile` subcommand: parse, run one pass, write, report sites.

use std::fmt::Write as _;
use std::path::Path;

use hidden_inverse::circuit::{parse_circuit, write_circuit, Circuit};
use hidden_inverse::compiler::{
    apply_orientation_rule, find_hidden_inverse_sites, randomized_compile, sk1_compile, OrientationRule,
};

use crate::{io_error, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pass {
    Hidden { threshold: f64 },
    Rc { seed: u64 },
    Sk1,
}

/// Compiled circuit and a human-readable site report.
pub fn compile_circuit(c: &Circuit, pass: Pass) -> CliResult<(Circuit, String)> {
    let mut report = String::new();
    match pass {
        Pass::Hidden { threshold } => {
            let rule = OrientationRule::new(threshold)?;
            let (out, decisions) = apply_orientation_rule(c, &rule);
            let _ = writeln!(report, "sites: {}", decisions.len());
            for d in &decisions {
                let _ = writeln!(
                    report,
                    "gates {}..{} angle {:.6} closing {:?}",
                    d.site.left_gate_index, d.site.right_gate_index, d.site.enclosed_angle, d.closing
                );
            }
            Ok((out, report))
        }
        Pass::Rc { seed } => {
            site_lines(c, &mut report);
            let _ = writeln!(report, "twirled with seed {seed}");
            Ok((randomized_compile(c, seed), report))
        }
        Pass::Sk1 => {
            site_lines(c, &mut report);
            Ok((sk1_compile(c)?, report))
        }
    }
}

fn site_lines(c: &Circuit, report: &mut String) {
    let sites = find_hidden_inverse_sites(c);
    let _ = writeln!(report, "sites: {}", sites.len());
    for s in &sites {
        let _ = writeln!(
            report,
            "gates {}..{} angle {:.6}",
            s.left_gate_index, s.right_gate_index, s.enclosed_angle
        );
    }
}

pub fn compile_file(input: &Path, output: &Path, pass: Pass) -> CliResult<String> {
    let text = std::fs::read_to_string(input).map_err(|e| io_error(input, e))?;
    let c = parse_circuit(&text).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let (out, report) = compile_circuit(&c, pass)?;
    std::fs::write(output, write_circuit(&out)).map_err(|e| io_error(output, e))?;
    Ok(report)
}
