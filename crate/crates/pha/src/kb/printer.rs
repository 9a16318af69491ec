//! Pretty-printer. Output always re-parses to a structurally equal program;
//! `parse . print` is a fixpoint.

use std::fmt::Write;

use super::{Program, Statement};
use crate::prob::Probability;

pub fn program_to_string<P: Probability>(program: &Program<P>) -> String {
    let mut out = String::new();
    for stmt in &program.statements {
        match stmt {
            Statement::Clause(c) => {
                let _ = writeln!(out, "{c}.");
            }
            Statement::Assumable(a) => {
                let _ = writeln!(out, "assumable( {}, {} ).", a.template, a.prior);
            }
        }
    }
    out
}
