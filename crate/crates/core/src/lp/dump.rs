//! Fixed-format plain-text rendering of linear programs for offline
//! inspection.
//!
//! ```text
//! lp <name>
//! vars <n> eq <k_eq> ge <k_ge>
//! free <j> <j> ...
//! obj   <c_1> ... <c_n>
//! eq    <a_1> ... <a_n> = <b>
//! ge    <g_1> ... <g_n> >= <h>
//! end
//! ```
//!
//! Every number is written as `{:>24.16e}` so columns line up.

use std::fmt::Write as _;
use std::io::Write;

use super::problem::LpProblem;
use crate::error::Result;

fn push_row(out: &mut String, tag: &str, coefs: impl Iterator<Item = f64>) {
    let _ = write!(out, "{tag:<5}");
    for v in coefs {
        let _ = write!(out, " {v:>24.16e}");
    }
}

/// Render one problem.
pub fn write_problem(name: &str, p: &LpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lp {name}");
    let _ = writeln!(out, "vars {} eq {} ge {}", p.n_vars(), p.n_eq(), p.n_ineq());
    let free: String = p.free_vars.iter().map(|j| format!(" {j}")).collect();
    let _ = writeln!(out, "free{free}");
    push_row(&mut out, "obj", p.objective.iter().copied());
    out.push('\n');
    for i in 0..p.n_eq() {
        push_row(&mut out, "eq", p.eq_lhs.row(i).iter().copied());
        let _ = writeln!(out, " = {:>24.16e}", p.eq_rhs[i]);
    }
    for i in 0..p.n_ineq() {
        push_row(&mut out, "ge", p.ineq_lhs.row(i).iter().copied());
        let _ = writeln!(out, " >= {:>24.16e}", p.ineq_rhs[i]);
    }
    out.push_str("end\n");
    out
}

/// Write several named problems to `w`, separated by blank lines.
pub fn dump_problems<W: Write>(mut w: W, problems: &[(String, LpProblem)]) -> Result<()> {
    for (k, (name, p)) in problems.iter().enumerate() {
        if k > 0 {
            writeln!(w)?;
        }
        w.write_all(write_problem(name, p).as_bytes())?;
    }
    Ok(())
}
