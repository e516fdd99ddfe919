//! Two-way automata with classical head and states plus a finite quantum
//! register, executed by sampling.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alphabet::{Alphabet, LEFT_END};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::C64;
use crate::quantum::{unitary_defect, BasisPartition, VALIDATION_TOL};
use crate::twoway::kwqfa::Move;

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumAction {
    Unitary(Matrix<C64>),
    Measure(BasisPartition),
}

/// `δ_q` then `δ_c` for one `(classical state, symbol)` pair. A unitary has
/// one branch; a measurement has one branch per block, in block order.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub action: QuantumAction,
    pub branches: Vec<(usize, Move)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tqcfa {
    alphabet: Alphabet,
    classical_states: Vec<String>,
    quantum_dim: usize,
    initial: usize,
    accept: usize,
    reject: usize,
    rules: BTreeMap<(usize, usize), Rule>,
}

impl Tqcfa {
    pub fn new(
        alphabet: Alphabet,
        classical_states: Vec<String>,
        quantum_dim: usize,
        initial: usize,
        accept: usize,
        reject: usize,
        rules: BTreeMap<(usize, usize), Rule>,
    ) -> Result<Self> {
        let n = classical_states.len();
        if [initial, accept, reject].iter().any(|&s| s >= n) {
            return Err(Error::InvalidParameter(
                "initial, accept or reject state out of range".into(),
            ));
        }
        if accept == reject {
            return Err(Error::InvalidParameter(
                "accepting and rejecting states coincide".into(),
            ));
        }
        if quantum_dim == 0 {
            return Err(Error::InvalidParameter(
                "quantum register of dimension 0".into(),
            ));
        }
        for (&(s, sym), rule) in &rules {
            let at = || {
                format!(
                    "rule ({}, '{}')",
                    classical_states.get(s).map_or("?", |x| x),
                    alphabet.symbol_key(sym)
                )
            };
            if s >= n || sym >= alphabet.symbol_count() {
                return Err(Error::InvalidParameter(format!("{} out of range", at())));
            }
            if s == accept || s == reject {
                return Err(Error::InvalidParameter(format!(
                    "{} leaves a halting state",
                    at()
                )));
            }
            let outcomes = match &rule.action {
                QuantumAction::Unitary(u) => {
                    if u.rows() != quantum_dim || u.cols() != quantum_dim {
                        return Err(Error::Dimension(format!(
                            "{}: unitary is {}x{}",
                            at(),
                            u.rows(),
                            u.cols()
                        )));
                    }
                    let defect = unitary_defect(u)?;
                    if defect > VALIDATION_TOL {
                        return Err(Error::Validation {
                            what: format!("unitarity of {}", at()),
                            defect,
                        });
                    }
                    1
                }
                QuantumAction::Measure(p) => {
                    if p.dim() != quantum_dim {
                        return Err(Error::Dimension(format!(
                            "{}: partition of dimension {}",
                            at(),
                            p.dim()
                        )));
                    }
                    p.blocks().len()
                }
            };
            if rule.branches.len() != outcomes {
                return Err(Error::InvalidParameter(format!(
                    "{}: {} branches for {outcomes} outcomes",
                    at(),
                    rule.branches.len()
                )));
            }
            for &(next, mv) in &rule.branches {
                if next >= n {
                    return Err(Error::InvalidParameter(format!(
                        "{}: next state {next} out of range",
                        at()
                    )));
                }
                let off_tape = (sym == LEFT_END && mv < 0)
                    || (sym == alphabet.right_end() && mv > 0)
                    || mv.abs() > 1;
                if off_tape {
                    return Err(Error::InvalidParameter(format!(
                        "{}: move {mv} leaves the tape",
                        at()
                    )));
                }
            }
        }
        Ok(Tqcfa {
            alphabet,
            classical_states,
            quantum_dim,
            initial,
            accept,
            reject,
            rules,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn classical_states(&self) -> &[String] {
        &self.classical_states
    }

    pub fn quantum_dim(&self) -> usize {
        self.quantum_dim
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accept_state(&self) -> usize {
        self.accept
    }

    pub fn reject_state(&self) -> usize {
        self.reject
    }

    pub fn rules(&self) -> &BTreeMap<(usize, usize), Rule> {
        &self.rules
    }

    /// Runs one trial from `s₁`, `|q₁⟩`, head on `¢`.
    pub fn run_trial(
        &self,
        tape: &[usize],
        rng: &mut impl Rng,
        max_steps: u64,
    ) -> Result<TrialOutcome> {
        let mut psi = vec![C64::zero(); self.quantum_dim];
        psi[0] = Complex::new(1.0, 0.0);
        let (mut state, mut pos) = (self.initial, 0usize);
        let mut steps = 0u64;
        while steps < max_steps {
            if state == self.accept {
                return Ok(TrialOutcome::Accepted(steps));
            }
            if state == self.reject {
                return Ok(TrialOutcome::Rejected(steps));
            }
            let rule = self.rules.get(&(state, tape[pos])).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no rule for ({}, '{}')",
                    self.classical_states[state],
                    self.alphabet.symbol_key(tape[pos])
                ))
            })?;
            let branch = match &rule.action {
                QuantumAction::Unitary(u) => {
                    psi = u.mul_vec(&psi)?;
                    0
                }
                QuantumAction::Measure(p) => measure(&mut psi, p, rng),
            };
            let (next, mv) = rule.branches[branch];
            state = next;
            pos = (pos as i64 + mv as i64) as usize;
            steps += 1;
        }
        match state {
            s if s == self.accept => Ok(TrialOutcome::Accepted(steps)),
            s if s == self.reject => Ok(TrialOutcome::Rejected(steps)),
            _ => Ok(TrialOutcome::Capped(steps)),
        }
    }
}

fn measure(psi: &mut [C64], p: &BasisPartition, rng: &mut impl Rng) -> usize {
    let probs: Vec<f64> = p
        .blocks()
        .iter()
        .map(|(_, b)| b.iter().map(|&i| psi[i].norm_sqr()).sum())
        .collect();
    let total: f64 = probs.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    let mut chosen = probs
        .iter()
        .rposition(|&q| q > 0.0)
        .expect("state has nonzero norm");
    for (k, &q) in probs.iter().enumerate() {
        if q > 0.0 && x < q {
            chosen = k;
            break;
        }
        x -= q;
    }
    let block = &p.blocks()[chosen].1;
    let scale = probs[chosen].sqrt();
    for (i, a) in psi.iter_mut().enumerate() {
        *a = if block.contains(&i) {
            *a / scale
        } else {
            C64::zero()
        };
    }
    chosen
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    Accepted(u64),
    Rejected(u64),
    /// Step cap hit before halting.
    Capped(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloStats {
    pub trials: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub capped: u64,
    /// `accepted / trials`.
    pub accept_frequency: f64,
    /// Over halted trials.
    pub mean_steps: f64,
    pub stddev_steps: f64,
    pub max_steps_seen: u64,
}

impl MonteCarloStats {
    /// Binomial standard error of `accept_frequency` around `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// `|freq − p| ≤ k·σ`, with a floor of one trial's weight so that
    /// degenerate `p ∈ {0, 1}` demands an exact match.
    pub fn within_sigmas(&self, p: f64, k: f64) -> bool {
        let slack = (k * self.sigma(p)).max(0.5 / self.trials as f64);
        (self.accept_frequency - p).abs() <= slack
    }
}

/// Independent trials; trial `i` draws from stream `i` of a ChaCha8 generator
/// keyed by `seed`, so results do not depend on scheduling.
pub fn tqcfa_monte_carlo(
    m: &Tqcfa,
    word: &str,
    trials: u64,
    seed: u64,
    max_steps: u64,
) -> Result<MonteCarloStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let tape = m.alphabet.tape(word)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            m.run_trial(&tape, &mut rng, max_steps)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut accepted, mut rejected, mut capped) = (0, 0, 0);
    let mut halted_steps = Vec::with_capacity(outcomes.len());
    let mut max_steps_seen = 0;
    for o in &outcomes {
        let s = match *o {
            TrialOutcome::Accepted(s) => {
                accepted += 1;
                halted_steps.push(s as f64);
                s
            }
            TrialOutcome::Rejected(s) => {
                rejected += 1;
                halted_steps.push(s as f64);
                s
            }
            TrialOutcome::Capped(s) => {
                capped += 1;
                s
            }
        };
        max_steps_seen = max_steps_seen.max(s);
    }
    let k = halted_steps.len().max(1) as f64;
    let mean_steps = halted_steps.iter().sum::<f64>() / k;
    let var = halted_steps
        .iter()
        .map(|s| (s - mean_steps).powi(2))
        .sum::<f64>()
        / k;
    Ok(MonteCarloStats {
        trials,
        accepted,
        rejected,
        capped,
        accept_frequency: accepted as f64 / trials as f64,
        mean_steps,
        stddev_steps: var.sqrt(),
        max_steps_seen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn always_reject() -> Tqcfa {
        let ab = Alphabet::from_letters("ab");
        let mut rules = BTreeMap::new();
        rules.insert(
            (0, 0),
            Rule {
                action: QuantumAction::Unitary(Matrix::identity(1)),
                branches: vec![(2, 0)],
            },
        );
        Tqcfa::new(
            ab,
            vec!["s".into(), "acc".into(), "rej".into()],
            1,
            0,
            1,
            2,
            rules,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_reject() {
        let stats = tqcfa_monte_carlo(&always_reject(), "abab", 200, 3, 100).unwrap();
        assert_eq!((stats.accepted, stats.rejected, stats.capped), (0, 200, 0));
        assert_eq!(stats.mean_steps, 1.0);
    }

    #[test]
    fn coin_frequency_and_reproducibility() {
        let ab = Alphabet::from_letters("a");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = Matrix::from_rows(vec![
            vec![Complex::new(h, 0.0), Complex::new(h, 0.0)],
            vec![Complex::new(h, 0.0), Complex::new(-h, 0.0)],
        ])
        .unwrap();
        let mut rules = BTreeMap::new();
        rules.insert(
            (0, 0),
            Rule {
                action: QuantumAction::Unitary(had),
                branches: vec![(1, 0)],
            },
        );
        rules.insert(
            (1, 0),
            Rule {
                action: QuantumAction::Measure(BasisPartition::singletons(2)),
                branches: vec![(2, 0), (3, 0)],
            },
        );
        let m = Tqcfa::new(
            ab,
            vec!["s".into(), "m".into(), "acc".into(), "rej".into()],
            2,
            0,
            2,
            3,
            rules,
        )
        .unwrap();
        let a = tqcfa_monte_carlo(&m, "", 20_000, 11, 10).unwrap();
        let b = tqcfa_monte_carlo(&m, "", 20_000, 11, 10).unwrap();
        assert_eq!(a, b);
        assert!(a.within_sigmas(0.5, 5.0));
    }

    #[test]
    fn capped_trials_are_counted() {
        let ab = Alphabet::from_letters("a");
        let mut rules = BTreeMap::new();
        rules.insert(
            (0, 0),
            Rule {
                action: QuantumAction::Unitary(Matrix::identity(1)),
                branches: vec![(0, 1)],
            },
        );
        rules.insert(
            (0, 1),
            Rule {
                action: QuantumAction::Unitary(Matrix::identity(1)),
                branches: vec![(0, -1)],
            },
        );
        let m = Tqcfa::new(
            ab,
            vec!["s".into(), "acc".into(), "rej".into()],
            1,
            0,
            1,
            2,
            rules,
        )
        .unwrap();
        let stats = tqcfa_monte_carlo(&m, "a", 10, 0, 50).unwrap();
        assert_eq!(stats.capped, 10);
        assert_eq!(stats.accept_frequency, 0.0);
    }

    #[test]
    fn validation_rejects_bad_rules() {
        let ab = Alphabet::from_letters("a");
        let states = || vec!["s".to_string(), "acc".to_string(), "rej".to_string()];
        let id = || QuantumAction::Unitary(Matrix::identity(1));
        let mut rules = BTreeMap::new();
        rules.insert(
            (0, 0),
            Rule {
                action: id(),
                branches: vec![(0, -1)],
            },
        );
        assert!(Tqcfa::new(ab.clone(), states(), 1, 0, 1, 2, rules).is_err());
        let mut rules = BTreeMap::new();
        rules.insert(
            (0, 2),
            Rule {
                action: id(),
                branches: vec![(0, 1)],
            },
        );
        assert!(Tqcfa::new(ab.clone(), states(), 1, 0, 1, 2, rules).is_err());
        let mut rules = BTreeMap::new();
        rules.insert(
            (0, 1),
            Rule {
                action: id(),
                branches: vec![(0, 1), (1, 0)],
            },
        );
        assert!(Tqcfa::new(ab.clone(), states(), 1, 0, 1, 2, rules).is_err());
        assert!(Tqcfa::new(ab, states(), 1, 0, 1, 1, BTreeMap::new()).is_err());
    }
}
