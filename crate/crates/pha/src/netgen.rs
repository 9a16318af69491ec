//! Seeded random generators for networks and programs.
//!
//! Used by the test suites (and `pha check`) to sweep randomized cases
//! reproducibly: the same seed always yields the same network or program.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bn::{BayesianNetwork, CptRowSpec, NetworkSpec, VariableSpec};
use crate::kb::{Assumable, Clause, Program, Statement};
use crate::terms::{Atom, Term};

const VALUE_NAMES: [&str; 4] = ["a", "b", "c", "d"];

#[derive(Clone, Copy, Debug)]
pub struct NetConfig {
    pub min_variables: usize,
    pub max_variables: usize,
    pub min_values: usize,
    pub max_values: usize,
    pub max_parents: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            min_variables: 3,
            max_variables: 5,
            min_values: 2,
            max_values: 3,
            max_parents: 2,
        }
    }
}

/// A random network over variables `x0..xn`, acyclic by construction
/// (parents are drawn from earlier variables only), with every CPT row
/// normalized and strictly positive.
pub fn random_network(seed: u64, config: &NetConfig) -> BayesianNetwork {
    assert!(
        config.min_variables >= 1 && config.min_variables <= config.max_variables,
        "bad variable range"
    );
    assert!(
        config.min_values >= 2 && config.min_values <= config.max_values,
        "bad value range"
    );
    assert!(config.max_values <= VALUE_NAMES.len(), "value pool exhausted");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(config.min_variables..=config.max_variables);
    let mut domains: Vec<Vec<String>> = Vec::with_capacity(count);
    let mut variables = Vec::with_capacity(count);

    for i in 0..count {
        let width = rng.gen_range(config.min_values..=config.max_values);
        let values: Vec<String> = VALUE_NAMES[..width].iter().map(|v| v.to_string()).collect();

        let max_parents = i.min(config.max_parents);
        let parent_count = if max_parents == 0 {
            0
        } else {
            rng.gen_range(0..=max_parents)
        };
        let mut pool: Vec<usize> = (0..i).collect();
        let mut parents = Vec::with_capacity(parent_count);
        for _ in 0..parent_count {
            let at = rng.gen_range(0..pool.len());
            parents.push(pool.swap_remove(at));
        }
        parents.sort_unstable();

        let mut cpt = Vec::new();
        for given in parent_value_combos(&parents, &domains) {
            let mut probabilities: Vec<f64> =
                (0..width).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = probabilities.iter().sum();
            for p in &mut probabilities {
                *p /= total;
            }
            cpt.push(CptRowSpec {
                given,
                probabilities,
            });
        }

        variables.push(VariableSpec {
            name: format!("x{i}"),
            values: values.clone(),
            parents: parents.iter().map(|&p| format!("x{p}")).collect(),
            cpt,
        });
        domains.push(values);
    }

    BayesianNetwork::from_spec(&NetworkSpec { variables })
        .expect("generated network must validate")
}

/// Row-major odometer over the parents' value combinations; a single empty
/// combination when there are no parents.
fn parent_value_combos(parents: &[usize], domains: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut combos = vec![Vec::new()];
    for &p in parents {
        let mut next = Vec::with_capacity(combos.len() * domains[p].len());
        for combo in &combos {
            for value in &domains[p] {
                let mut extended = combo.clone();
                extended.push(value.clone());
                next.push(extended);
            }
        }
        combos = next;
    }
    combos
}

/// A random syntactically-valid program for parser/printer round-trips.
/// It is not meant to satisfy the engine's modelling assumptions.
pub fn random_program(seed: u64) -> Program<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(3..=12);
    let statements = (0..count).map(|_| random_statement(&mut rng)).collect();
    Program { statements }
}

fn random_statement(rng: &mut ChaCha8Rng) -> Statement<f64> {
    if rng.gen_bool(0.35) {
        let prior = rng.gen_range(0..=1000) as f64 / 1000.0;
        Statement::Assumable(Assumable {
            template: random_atom(rng, 2),
            prior,
        })
    } else {
        let head = if rng.gen_bool(0.15) {
            Atom::falsum()
        } else {
            random_atom(rng, 2)
        };
        let body_len = if head.is_falsum() {
            rng.gen_range(1..=3)
        } else {
            rng.gen_range(0..=3)
        };
        let body = (0..body_len).map(|_| random_atom(rng, 2)).collect();
        Statement::Clause(Clause { head, body })
    }
}

fn random_atom(rng: &mut ChaCha8Rng, depth: usize) -> Atom {
    const PREDICATES: [&str; 5] = ["p", "q", "r", "s", "t"];
    let predicate = PREDICATES[rng.gen_range(0..PREDICATES.len())];
    let arity = rng.gen_range(0..=3);
    let args = (0..arity).map(|_| random_term(rng, depth)).collect();
    Atom::new(predicate, args)
}

fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    const VARIABLES: [&str; 4] = ["X", "Y", "Z", "W"];
    const CONSTANTS: [&str; 6] = ["a", "b", "c", "1", "2", "42"];
    const FUNCTORS: [&str; 3] = ["f", "g", "h"];
    let roll = rng.gen_range(0..10);
    if roll < 4 {
        Term::var(VARIABLES[rng.gen_range(0..VARIABLES.len())])
    } else if roll < 8 || depth == 0 {
        Term::constant(CONSTANTS[rng.gen_range(0..CONSTANTS.len())])
    } else {
        let functor = FUNCTORS[rng.gen_range(0..FUNCTORS.len())];
        let arity = rng.gen_range(1..=2);
        let args = (0..arity).map(|_| random_term(rng, depth - 1)).collect();
        Term::compound(functor, args)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = random_network(7, &NetConfig::default());
        let b = random_network(7, &NetConfig::default());
        assert_eq!(a.variables().len(), b.variables().len());
        for (va, vb) in a.variables().iter().zip(b.variables()) {
            assert_eq!(va.name, vb.name);
            assert_eq!(va.values, vb.values);
            assert_eq!(va.parents, vb.parents);
            for (ra, rb) in va.cpt.iter().zip(&vb.cpt) {
                assert_eq!(ra.given, rb.given);
                assert_eq!(ra.probabilities, rb.probabilities);
            }
        }
        assert_ne!(
            format!("{:?}", random_program(1).statements),
            format!("{:?}", random_program(2).statements),
        );
    }

    #[test]
    fn networks_validate_across_seeds() {
        for seed in 0..40 {
            let net = random_network(seed, &NetConfig::default());
            assert!(!net.variables().is_empty());
            for v in net.variables() {
                for row in &v.cpt {
                    let total: f64 = row.probabilities.iter().sum();
                    assert!((total - 1.0).abs() < 1e-9);
                    assert!(row.probabilities.iter().all(|p| *p > 0.0));
                }
            }
        }
    }

    #[test]
    fn programs_are_parseable_after_printing() {
        for seed in 0..20 {
            let program = random_program(seed);
            let text = crate::kb::program_to_string(&program);
            let reparsed: Program<f64> = crate::kb::parse_program(&text).unwrap();
            assert_eq!(program, reparsed, "seed {seed}:\n{text}");
        }
    }
}
