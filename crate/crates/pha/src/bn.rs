//! Bayesian networks: JSON input format, structural validation, and
//! compilation into the rule language.
//!
//! Compilation maps each root variable's values to directly assumable atoms,
//! and each non-root `a` with parents `b1..bm` to a bridge rule
//! `a(V) <- b1(V1), ..., bm(Vm), c_a(V, V1, ..., Vm)` whose `c_a` hypotheses
//! carry the CPT entries as priors. Exclusivity constraints
//! `false <- a(vj), a(vk)` keep distinct values of one variable from being
//! assumed together.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::kb::{Assumable, Clause, Diagnostic, Program, Severity, Statement};
use crate::prob::Probability;
use crate::terms::{Atom, Term, FALSE};

/// Maximum deviation of a CPT row's sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Serde mirror of the on-disk JSON format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub variables: Vec<VariableSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parents: Vec<String>,
    pub cpt: Vec<CptRowSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CptRowSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub given: Vec<String>,
    pub probabilities: Vec<f64>,
}

/// A validated network. Variable order is input order; parents always precede
/// children in the dependency sense (the graph is checked acyclic) though not
/// necessarily in input order.
#[derive(Clone, Debug)]
pub struct BayesianNetwork {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
    /// Indices into the network's variable list, in declaration order.
    pub parents: Vec<usize>,
    pub cpt: Vec<CptRow>,
    row_index: HashMap<Vec<String>, usize>,
}

#[derive(Clone, Debug)]
pub struct CptRow {
    pub given: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl Variable {
    pub fn is_root(&self) -> bool {
        self.parents.is_empty()
    }

    /// CPT row for a full parent-value assignment (in parent declaration order).
    pub fn row_for(&self, given: &[String]) -> Option<&CptRow> {
        self.row_index.get(given).map(|&i| &self.cpt[i])
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

impl BayesianNetwork {
    /// Parse and validate the JSON format.
    pub fn parse(src: &str) -> Result<BayesianNetwork, Vec<Diagnostic>> {
        let spec: NetworkSpec = serde_json::from_str(src).map_err(|e| {
            vec![Diagnostic {
                severity: Severity::Error,
                code: "bn/json",
                message: e.to_string(),
                line: Some(e.line() as u32),
                col: Some(e.column() as u32),
            }]
        })?;
        Self::from_spec(&spec)
    }

    /// Validate an already-deserialized spec.
    pub fn from_spec(spec: &NetworkSpec) -> Result<BayesianNetwork, Vec<Diagnostic>> {
        let mut diags: Vec<Diagnostic> = Vec::new();
        fn err(diags: &mut Vec<Diagnostic>, code: &'static str, message: String) {
            diags.push(Diagnostic::global(Severity::Error, code, message));
        }

        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, v) in spec.variables.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                err(&mut diags, "bn/duplicate-variable", format!("variable '{}' declared twice", v.name));
            }
        }

        for v in &spec.variables {
            if !valid_symbol(&v.name) {
                err(
                    &mut diags,
                    "bn/bad-name",
                    format!(
                        "variable name '{}' is not a valid constant (lowercase/digit first, alphanumeric or '_', not reserved)",
                        v.name
                    ),
                );
            }
            if v.values.len() < 2 {
                err(
                    &mut diags,
                    "bn/too-few-values",
                    format!("variable '{}' needs at least 2 values", v.name),
                );
            }
            let mut seen_values = HashSet::new();
            for val in &v.values {
                if !valid_symbol(val) {
                    err(
                        &mut diags,
                        "bn/bad-value",
                        format!("value '{}' of variable '{}' is not a valid constant", val, v.name),
                    );
                }
                if !seen_values.insert(val) {
                    err(
                        &mut diags,
                        "bn/bad-value",
                        format!("value '{}' of variable '{}' repeats", val, v.name),
                    );
                }
            }
            let mut seen_parents = HashSet::new();
            for p in &v.parents {
                if p == &v.name {
                    err(&mut diags, "bn/self-parent", format!("variable '{}' lists itself as parent", v.name));
                } else if !index.contains_key(p) {
                    err(
                        &mut diags,
                        "bn/unknown-parent",
                        format!("variable '{}' lists unknown parent '{}'", v.name, p),
                    );
                }
                if !seen_parents.insert(p) {
                    err(
                        &mut diags,
                        "bn/duplicate-parent",
                        format!("variable '{}' lists parent '{}' twice", v.name, p),
                    );
                }
            }
            // The compiled hypothesis predicate for a non-root x is c_x; a
            // variable of that name would collide with it.
            if !v.parents.is_empty() {
                let hyp = format!("c_{}", v.name);
                if index.contains_key(&hyp) {
                    err(
                        &mut diags,
                        "bn/c-name-collision",
                        format!(
                            "variable '{}' collides with the hypothesis predicate generated for '{}'",
                            hyp, v.name
                        ),
                    );
                }
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }

        // Acyclicity before CPT checks: row enumeration needs a sane graph.
        if let Some(cycle) = spec_cycle(spec, &index) {
            return Err(vec![Diagnostic::global(
                Severity::Error,
                "bn/cycle",
                format!("parent relation is cyclic: {}", cycle.join(" -> ")),
            )]);
        }

        let mut variables = Vec::with_capacity(spec.variables.len());
        for v in &spec.variables {
            let parent_indices: Vec<usize> = v.parents.iter().map(|p| index[p]).collect();
            let expected_rows: usize = parent_indices
                .iter()
                .map(|&pi| spec.variables[pi].values.len())
                .product();
            let mut row_index: HashMap<Vec<String>, usize> = HashMap::new();
            let mut rows = Vec::with_capacity(v.cpt.len());
            for (ri, row) in v.cpt.iter().enumerate() {
                if row.given.len() != v.parents.len() {
                    err(
                        &mut diags,
                        "bn/bad-given",
                        format!(
                            "variable '{}' row {}: expected {} parent values, found {}",
                            v.name,
                            ri,
                            v.parents.len(),
                            row.given.len()
                        ),
                    );
                    continue;
                }
                let mut given_ok = true;
                for (g, &pi) in row.given.iter().zip(&parent_indices) {
                    let parent = &spec.variables[pi];
                    if !parent.values.contains(g) {
                        err(
                            &mut diags,
                            "bn/bad-given",
                            format!(
                                "variable '{}' row {}: '{}' is not a value of parent '{}'",
                                v.name, ri, g, parent.name
                            ),
                        );
                        given_ok = false;
                    }
                }
                if row.probabilities.len() != v.values.len() {
                    err(
                        &mut diags,
                        "bn/row-length",
                        format!(
                            "variable '{}' row {}: expected {} probabilities, found {}",
                            v.name,
                            ri,
                            v.values.len(),
                            row.probabilities.len()
                        ),
                    );
                    given_ok = false;
                }
                for &p in &row.probabilities {
                    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                        err(
                            &mut diags,
                            "bn/bad-probability",
                            format!("variable '{}' row {}: probability {} outside [0, 1]", v.name, ri, p),
                        );
                        given_ok = false;
                    }
                }
                if !given_ok {
                    continue;
                }
                let sum: f64 = row.probabilities.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    err(
                        &mut diags,
                        "bn/row-sum",
                        format!(
                            "variable '{}' row {:?} sums to {} (must be 1 within {})",
                            v.name, row.given, sum, ROW_SUM_TOLERANCE
                        ),
                    );
                }
                if row_index.insert(row.given.clone(), rows.len()).is_some() {
                    err(
                        &mut diags,
                        "bn/duplicate-row",
                        format!("variable '{}' row {:?} repeats", v.name, row.given),
                    );
                    continue;
                }
                rows.push(CptRow {
                    given: row.given.clone(),
                    probabilities: row.probabilities.clone(),
                });
            }
            if rows.len() != expected_rows {
                err(
                    &mut diags,
                    "bn/missing-row",
                    format!(
                        "variable '{}': CPT has {} valid rows, needs one per parent combination ({})",
                        v.name,
                        rows.len(),
                        expected_rows
                    ),
                );
            }
            variables.push(Variable {
                name: v.name.clone(),
                values: v.values.clone(),
                parents: parent_indices,
                cpt: rows,
                row_index,
            });
        }

        if diags.is_empty() {
            Ok(BayesianNetwork { variables, index })
        } else {
            Err(diags)
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.index.get(name).map(|&i| &self.variables[i])
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Longest parent chain above `name`: 0 for roots, else
    /// `1 + max(depth(parent))`.
    pub fn depth(&self, name: &str) -> Option<usize> {
        let i = self.variable_index(name)?;
        let mut memo = vec![None; self.variables.len()];
        Some(self.depth_memo(i, &mut memo))
    }

    fn depth_memo(&self, i: usize, memo: &mut Vec<Option<usize>>) -> usize {
        if let Some(d) = memo[i] {
            return d;
        }
        let d = self.variables[i]
            .parents
            .iter()
            .map(|&p| 1 + self.depth_memo(p, memo))
            .max()
            .unwrap_or(0);
        memo[i] = Some(d);
        d
    }

    /// Variables with no children, in declaration order.
    pub fn terminals(&self) -> Vec<&str> {
        let mut has_child = vec![false; self.variables.len()];
        for v in &self.variables {
            for &p in &v.parents {
                has_child[p] = true;
            }
        }
        self.variables
            .iter()
            .zip(has_child)
            .filter(|(_, h)| !h)
            .map(|(v, _)| v.name.as_str())
            .collect()
    }

    /// Compile to the rule language.
    pub fn compile<P: Probability>(&self, options: &CompileOptions) -> CompiledNetwork<P> {
        let mut statements: Vec<Statement<P>> = Vec::new();
        let mut provenance: Vec<Provenance> = Vec::new();
        let mut push = |s: Statement<P>, p: Provenance| {
            statements.push(s);
            provenance.push(p);
        };

        for (vi, var) in self.variables.iter().enumerate() {
            let value_atom = |value: &str| Atom::new(var.name.clone(), vec![Term::constant(value)]);
            if var.is_root() {
                for (wi, value) in var.values.iter().enumerate() {
                    push(
                        Statement::Assumable(Assumable {
                            template: value_atom(value),
                            prior: P::from_linear(var.cpt[0].probabilities[wi]),
                        }),
                        Provenance::Prior {
                            variable: vi,
                            row: 0,
                            value: wi,
                        },
                    );
                }
            } else {
                // a(V) <- b1(V1), ..., bm(Vm), c_a(V, V1, ..., Vm).
                let own = Term::var("V");
                let parent_vars: Vec<Term> = (1..=var.parents.len())
                    .map(|i| Term::var(format!("V{i}")))
                    .collect();
                let mut body: Vec<Atom> = var
                    .parents
                    .iter()
                    .zip(&parent_vars)
                    .map(|(&pi, pv)| Atom::new(self.variables[pi].name.clone(), vec![pv.clone()]))
                    .collect();
                let mut c_args = vec![own.clone()];
                c_args.extend(parent_vars.iter().cloned());
                body.push(Atom::new(hypothesis_predicate(&var.name), c_args));
                push(
                    Statement::Clause(Clause {
                        head: Atom::new(var.name.clone(), vec![own]),
                        body,
                    }),
                    Provenance::BridgeRule { variable: vi },
                );
            }

            // Distinct values of one variable are mutually exclusive.
            for j in 0..var.values.len() {
                for k in (j + 1)..var.values.len() {
                    push(
                        Statement::Clause(Clause {
                            head: Atom::falsum(),
                            body: vec![value_atom(&var.values[j]), value_atom(&var.values[k])],
                        }),
                        Provenance::Exclusivity {
                            variable: vi,
                            values: (j, k),
                        },
                    );
                    if options.symmetric_constraints {
                        push(
                            Statement::Clause(Clause {
                                head: Atom::falsum(),
                                body: vec![value_atom(&var.values[k]), value_atom(&var.values[j])],
                            }),
                            Provenance::Exclusivity {
                                variable: vi,
                                values: (k, j),
                            },
                        );
                    }
                }
            }

            if !var.is_root() {
                let c_atom = |value: &str, given: &[String]| {
                    let mut args = vec![Term::constant(value)];
                    args.extend(given.iter().map(Term::constant));
                    Atom::new(hypothesis_predicate(&var.name), args)
                };
                for (ri, row) in var.cpt.iter().enumerate() {
                    for (wi, value) in var.values.iter().enumerate() {
                        push(
                            Statement::Assumable(Assumable {
                                template: c_atom(value, &row.given),
                                prior: P::from_linear(row.probabilities[wi]),
                            }),
                            Provenance::Prior {
                                variable: vi,
                                row: ri,
                                value: wi,
                            },
                        );
                    }
                    if options.c_constraints {
                        for j in 0..var.values.len() {
                            for k in (j + 1)..var.values.len() {
                                push(
                                    Statement::Clause(Clause {
                                        head: Atom::falsum(),
                                        body: vec![
                                            c_atom(&var.values[j], &row.given),
                                            c_atom(&var.values[k], &row.given),
                                        ],
                                    }),
                                    Provenance::RowExclusivity {
                                        variable: vi,
                                        row: ri,
                                        values: (j, k),
                                    },
                                );
                            }
                        }
                    }
                }
            }
        }

        CompiledNetwork {
            program: Program { statements },
            provenance,
            domains: DomainsFile {
                variables: self
                    .variables
                    .iter()
                    .map(|v| DomainEntry {
                        name: v.name.clone(),
                        values: v.values.clone(),
                    })
                    .collect(),
            },
        }
    }
}

/// Predicate naming the CPT hypotheses of a non-root variable.
pub fn hypothesis_predicate(variable: &str) -> String {
    format!("c_{variable}")
}

fn valid_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first.is_ascii_lowercase() || first.is_ascii_digit())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != FALSE
        && s != crate::kb::ASSUMABLE_KEYWORD
}

fn spec_cycle(spec: &NetworkSpec, index: &HashMap<String, usize>) -> Option<Vec<String>> {
    // Iterative Kahn's algorithm; on failure, walk the residual graph for a
    // concrete witness path.
    let n = spec.variables.len();
    let mut indegree = vec![0usize; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, v) in spec.variables.iter().enumerate() {
        for p in &v.parents {
            let pi = index[p];
            children[pi].push(i);
            indegree[i] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = queue.pop() {
        seen += 1;
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push(c);
            }
        }
    }
    if seen == n {
        return None;
    }
    // Every remaining node sits on or upstream of a cycle: follow residual
    // parents until a repeat.
    let start = (0..n).find(|&i| indegree[i] > 0).expect("cycle exists");
    let mut path = vec![start];
    let mut current = start;
    loop {
        let next = spec.variables[current]
            .parents
            .iter()
            .map(|p| index[p])
            .find(|&pi| indegree[pi] > 0)
            .expect("residual node keeps a residual parent");
        if let Some(pos) = path.iter().position(|&x| x == next) {
            let mut cycle: Vec<String> = path[pos..]
                .iter()
                .map(|&i| spec.variables[i].name.clone())
                .collect();
            cycle.reverse();
            cycle.push(spec.variables[next].name.clone());
            return Some(cycle);
        }
        path.push(next);
        current = next;
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CompileOptions {
    /// Emit each exclusivity constraint in both argument orders instead of
    /// once per unordered pair. The mirror constraints are redundant.
    pub symmetric_constraints: bool,
    /// Emit exclusivity constraints between same-row CPT hypotheses. Off by
    /// default: distinct-value hypotheses of one row can never support a
    /// consistent derivation together, so these constraints don't change any
    /// mass (asserted in tests), but they make the exclusivity reading of the
    /// hypothesis space explicit.
    pub c_constraints: bool,
}

/// Where a compiled statement came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    BridgeRule { variable: usize },
    Exclusivity { variable: usize, values: (usize, usize) },
    RowExclusivity { variable: usize, row: usize, values: (usize, usize) },
    /// CPT entry `cpt[row].probabilities[value]` of `variable`; the direct
    /// prior for roots, a `c_` hypothesis prior otherwise.
    Prior { variable: usize, row: usize, value: usize },
}

#[derive(Clone, Debug)]
pub struct CompiledNetwork<P> {
    pub program: Program<P>,
    /// Aligned with `program.statements`.
    pub provenance: Vec<Provenance>,
    pub domains: DomainsFile,
}

/// Value-domain sidecar: lets query tooling enumerate a variable's values
/// without re-reading the network.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DomainsFile {
    pub variables: Vec<DomainEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DomainEntry {
    pub name: String,
    pub values: Vec<String>,
}

impl DomainsFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("domains serialize")
    }

    pub fn parse(src: &str) -> Result<DomainsFile, Diagnostic> {
        serde_json::from_str(src).map_err(|e| Diagnostic {
            severity: Severity::Error,
            code: "bn/domains-json",
            message: e.to_string(),
            line: Some(e.line() as u32),
            col: Some(e.column() as u32),
        })
    }

    pub fn values_of(&self, name: &str) -> Option<&[String]> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.values.as_slice())
    }
}
