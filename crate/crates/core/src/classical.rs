//! One-way probabilistic and generalized finite automata, and the
//! language-recognition rules applied to their acceptance values.

use std::fmt;
use std::str::FromStr;

use crate::alphabet::Alphabet;
use crate::error::{dim_err, Error, Result};
use crate::matrix::Matrix;
use crate::numeric::Real;

/// Probabilistic automaton with column-stochastic transition matrices:
/// `A_σ[j,i]` is the probability of moving from `q_i` to `q_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pfa<R: Real> {
    alphabet: Alphabet,
    transitions: Vec<Matrix<R>>,
    accepting: Vec<usize>,
}

impl<R: Real> Pfa<R> {
    /// `transitions` is indexed by tape symbol (see [`Alphabet`]). The
    /// initial state is index 0.
    pub fn new(
        alphabet: Alphabet,
        transitions: Vec<Matrix<R>>,
        accepting: Vec<usize>,
        tol: f64,
    ) -> Result<Self> {
        let n = check_shapes(&alphabet, &transitions)?;
        check_indices(&accepting, n)?;
        for (s, a) in transitions.iter().enumerate() {
            for i in 0..n {
                let mut sum = R::zero();
                for j in 0..n {
                    if a[(j, i)] < R::zero() {
                        return Err(Error::Validation {
                            what: format!(
                                "entry ({j},{i}) of transition '{}'",
                                alphabet.symbol_key(s)
                            ),
                            defect: a[(j, i)].to_f64().abs(),
                        });
                    }
                    sum = sum + a[(j, i)].clone();
                }
                let defect = (sum.to_f64() - 1.0).abs();
                if defect > tol {
                    return Err(Error::Validation {
                        what: format!(
                            "column {i} of transition '{}' (sums to {})",
                            alphabet.symbol_key(s),
                            sum.to_f64()
                        ),
                        defect,
                    });
                }
            }
        }
        Ok(Pfa {
            alphabet,
            transitions,
            accepting,
        })
    }

    /// Deterministic automaton as a 0/1 PFA. `delta[s][q]` is the successor
    /// of state `q` on tape symbol `s`.
    pub fn from_dfa(
        alphabet: Alphabet,
        states: usize,
        delta: &[Vec<usize>],
        accepting: Vec<usize>,
    ) -> Result<Self> {
        let transitions = delta
            .iter()
            .map(|row| {
                if row.len() != states || row.iter().any(|&t| t >= states) {
                    return dim_err("DFA transition row does not match the state count");
                }
                let mut m = Matrix::zeros(states, states);
                for (q, &t) in row.iter().enumerate() {
                    m[(t, q)] = R::one();
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Pfa::new(alphabet, transitions, accepting, 0.0)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.transitions[0].rows()
    }

    pub fn transitions(&self) -> &[Matrix<R>] {
        &self.transitions
    }

    pub fn accepting(&self) -> &[usize] {
        &self.accepting
    }

    /// Acceptance probability on `¢ w $`.
    pub fn accept_prob(&self, word: &str) -> Result<R> {
        self.lift().value(word)
    }

    /// The same automaton viewed as a generalized automaton.
    pub fn lift(&self) -> Gfa<R> {
        let n = self.states();
        let mut initial = vec![R::zero(); n];
        initial[0] = R::one();
        Gfa {
            alphabet: self.alphabet.clone(),
            transitions: self.transitions.clone(),
            initial,
            final_vec: indicator(n, &self.accepting),
        }
    }
}

/// Generalized (Turakainen) automaton: arbitrary real matrices, initial
/// vector and final functional.
#[derive(Clone, Debug, PartialEq)]
pub struct Gfa<R: Real> {
    alphabet: Alphabet,
    transitions: Vec<Matrix<R>>,
    initial: Vec<R>,
    final_vec: Vec<R>,
}

impl<R: Real> Gfa<R> {
    pub fn new(
        alphabet: Alphabet,
        transitions: Vec<Matrix<R>>,
        initial: Vec<R>,
        final_vec: Vec<R>,
    ) -> Result<Self> {
        let n = check_shapes(&alphabet, &transitions)?;
        if initial.len() != n || final_vec.len() != n {
            return dim_err(format!(
                "initial/final vectors of length {}/{} for {n} states",
                initial.len(),
                final_vec.len()
            ));
        }
        Ok(Gfa {
            alphabet,
            transitions,
            initial,
            final_vec,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.initial.len()
    }

    pub fn transitions(&self) -> &[Matrix<R>] {
        &self.transitions
    }

    pub fn initial(&self) -> &[R] {
        &self.initial
    }

    pub fn final_vector(&self) -> &[R] {
        &self.final_vec
    }

    /// State vector after `¢` followed by the letters of `word` (no `$`).
    pub fn state_after(&self, letters: &[usize]) -> Vec<R> {
        let mut v = self.transitions[0]
            .mul_vec(&self.initial)
            .expect("validated shapes");
        for &s in letters {
            v = self.transitions[s].mul_vec(&v).expect("validated shapes");
        }
        v
    }

    /// `f · A_$ A_{w_n} … A_{w_1} A_¢ v₀`.
    pub fn value(&self, word: &str) -> Result<R> {
        let letters = self.alphabet.encode(word)?;
        let v = self.state_after(&letters);
        let v = self.transitions[self.alphabet.right_end()].mul_vec(&v)?;
        Ok(dot(&self.final_vec, &v))
    }

    pub fn negated(&self) -> Self {
        Gfa {
            final_vec: self.final_vec.iter().map(|x| -x.clone()).collect(),
            ..self.clone()
        }
    }
}

pub(crate) fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter()
        .zip(b)
        .fold(R::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub(crate) fn indicator<R: Real>(n: usize, set: &[usize]) -> Vec<R> {
    let mut v = vec![R::zero(); n];
    for &i in set {
        v[i] = R::one();
    }
    v
}

fn check_shapes<T: crate::numeric::Scalar>(
    alphabet: &Alphabet,
    transitions: &[Matrix<T>],
) -> Result<usize> {
    if transitions.len() != alphabet.symbol_count() {
        return dim_err(format!(
            "{} transition matrices for {} tape symbols",
            transitions.len(),
            alphabet.symbol_count()
        ));
    }
    let n = transitions[0].rows();
    if n == 0 {
        return dim_err("automaton needs at least one state");
    }
    for (s, m) in transitions.iter().enumerate() {
        if m.rows() != n || m.cols() != n {
            return dim_err(format!(
                "transition '{}' is {}x{}, expected {n}x{n}",
                alphabet.symbol_key(s),
                m.rows(),
                m.cols()
            ));
        }
    }
    Ok(n)
}

pub(crate) fn check_indices(set: &[usize], n: usize) -> Result<()> {
    match set.iter().find(|&&i| i >= n) {
        Some(i) => dim_err(format!("state index {i} out of range for {n} states")),
        None => Ok(()),
    }
}

/// Rule turning an acceptance value into a membership decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AcceptanceMode {
    /// member iff value > λ
    CutpointStrict(f64),
    /// member iff value ≥ λ
    CutpointNonstrict(f64),
    /// member iff value ≥ 1−ε, nonmember iff value ≤ ε, with ε < 1/2
    BoundedError(f64),
    /// member iff value > 0
    PositiveOneSided,
    /// member iff value = 1
    NegativeOneSided,
    /// member iff value = 1, nonmember iff value ≤ ε, for any ε < 1
    NegativeOneSidedBounded(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Member,
    Nonmember,
    Undetermined,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Member => "member",
            Decision::Nonmember => "nonmember",
            Decision::Undetermined => "undetermined",
        })
    }
}

impl AcceptanceMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AcceptanceMode::CutpointStrict(l) | AcceptanceMode::CutpointNonstrict(l)
                if !l.is_finite() =>
            {
                Err(Error::InvalidParameter(format!(
                    "cutpoint {l} is not finite"
                )))
            }
            AcceptanceMode::BoundedError(e) if !(0.0..0.5).contains(&e) => Err(
                Error::InvalidParameter(format!("error bound {e} outside [0, 1/2)")),
            ),
            AcceptanceMode::NegativeOneSidedBounded(e) if !(0.0..1.0).contains(&e) => Err(
                Error::InvalidParameter(format!("one-sided error bound {e} outside [0, 1)")),
            ),
            _ => Ok(()),
        }
    }
}

/// Classifies an acceptance value. `tol` absorbs float noise at every
/// threshold, so `λ + 1e-16` is not above the cutpoint `λ`.
pub fn classify_word(value: f64, mode: AcceptanceMode, tol: f64) -> Decision {
    let yes = |b: bool| {
        if b {
            Decision::Member
        } else {
            Decision::Nonmember
        }
    };
    match mode {
        AcceptanceMode::CutpointStrict(l) => yes(value > l + tol),
        AcceptanceMode::CutpointNonstrict(l) => yes(value >= l - tol),
        AcceptanceMode::BoundedError(e) => {
            if value >= 1.0 - e - tol {
                Decision::Member
            } else if value <= e + tol {
                Decision::Nonmember
            } else {
                Decision::Undetermined
            }
        }
        AcceptanceMode::PositiveOneSided => yes(value > tol),
        AcceptanceMode::NegativeOneSided => yes((value - 1.0).abs() <= tol),
        AcceptanceMode::NegativeOneSidedBounded(e) => {
            if (value - 1.0).abs() <= tol {
                Decision::Member
            } else if value <= e + tol {
                Decision::Nonmember
            } else {
                Decision::Undetermined
            }
        }
    }
}

impl FromStr for AcceptanceMode {
    type Err = Error;

    /// `cutpoint:λ`, `nonstrict:λ`, `bounded:ε`, `positive`, `negative`,
    /// `negative-bounded:ε`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = || -> Result<f64> {
            let a = arg.ok_or_else(|| Error::Parse(format!("mode '{name}' needs a value")))?;
            f64::parse_str(a)
        };
        let mode = match name {
            "cutpoint" | "cutpoint-strict" => AcceptanceMode::CutpointStrict(num()?),
            "nonstrict" | "cutpoint-nonstrict" => AcceptanceMode::CutpointNonstrict(num()?),
            "bounded" | "bounded-error" => AcceptanceMode::BoundedError(num()?),
            "positive" | "positive-one-sided" => AcceptanceMode::PositiveOneSided,
            "negative" | "negative-one-sided" => AcceptanceMode::NegativeOneSided,
            "negative-bounded" => AcceptanceMode::NegativeOneSidedBounded(num()?),
            other => {
                return Err(Error::Unknown {
                    kind: "acceptance mode",
                    name: other.into(),
                })
            }
        };
        mode.validate()?;
        Ok(mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn even_a() -> Pfa<Rational> {
        // two states tracking parity of a's; end-markers identity
        Pfa::from_dfa(
            Alphabet::from_letters("a"),
            2,
            &[vec![0, 1], vec![1, 0], vec![0, 1]],
            vec![0],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_parity() {
        let p = even_a();
        assert_eq!(p.accept_prob("aa").unwrap(), r(1, 1));
        assert_eq!(p.accept_prob("a").unwrap(), r(0, 1));
        assert_eq!(p.accept_prob("").unwrap(), r(1, 1));
        assert!(matches!(p.accept_prob("b"), Err(Error::Alphabet { .. })));
    }

    #[test]
    fn single_mixing_step() {
        let id = Matrix::identity(2);
        let half = Matrix::from_rows(vec![vec![r(1, 2), r(1, 2)], vec![r(1, 2), r(1, 2)]]).unwrap();
        let p = Pfa::new(
            Alphabet::from_letters("a"),
            vec![id.clone(), half, id],
            vec![1],
            0.0,
        )
        .unwrap();
        assert_eq!(p.accept_prob("a").unwrap(), r(1, 2));
        assert_eq!(p.accept_prob("").unwrap(), r(0, 1));
    }

    #[test]
    fn rejects_substochastic_column() {
        let id: Matrix<f64> = Matrix::identity(2);
        let bad = Matrix::from_rows(vec![vec![0.5, 0.0], vec![0.4, 1.0]]).unwrap();
        let err = Pfa::new(
            Alphabet::from_letters("a"),
            vec![id.clone(), bad, id],
            vec![1],
            1e-9,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("column 0 of transition 'a'"), "{msg}");
    }

    #[test]
    fn gfa_identity_and_negation() {
        let id: Matrix<f64> = Matrix::identity(2);
        let g = Gfa::new(
            Alphabet::from_letters("ab"),
            vec![id.clone(); 4],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
        )
        .unwrap();
        for w in ["", "a", "abba"] {
            assert_eq!(g.value(w).unwrap(), 1.0);
            assert_eq!(g.negated().value(w).unwrap(), -1.0);
        }
        assert!(Gfa::new(
            Alphabet::from_letters("a"),
            vec![id.clone(); 3],
            vec![1.0],
            vec![1.0, 0.0]
        )
        .is_err());
    }

    #[test]
    fn classification_rules() {
        use AcceptanceMode::*;
        assert_eq!(
            classify_word(0.6, CutpointStrict(0.5), 0.0),
            Decision::Member
        );
        assert_eq!(
            classify_word(0.5, CutpointStrict(0.5), 0.0),
            Decision::Nonmember
        );
        assert_eq!(
            classify_word(0.5 + 1e-15, CutpointStrict(0.5), 1e-9),
            Decision::Nonmember
        );
        assert_eq!(
            classify_word(0.5, CutpointNonstrict(0.5), 0.0),
            Decision::Member
        );
        assert_eq!(
            classify_word(0.4, BoundedError(1.0 / 3.0), 1e-12),
            Decision::Undetermined
        );
        assert_eq!(
            classify_word(0.7, BoundedError(1.0 / 3.0), 1e-12),
            Decision::Member
        );
        assert_eq!(
            classify_word(0.2, BoundedError(1.0 / 3.0), 1e-12),
            Decision::Nonmember
        );
        assert_eq!(
            classify_word(0.0, PositiveOneSided, 1e-12),
            Decision::Nonmember
        );
        assert_eq!(
            classify_word(1e-3, PositiveOneSided, 1e-12),
            Decision::Member
        );
        assert_eq!(
            classify_word(1.0 - 1e-14, NegativeOneSided, 1e-12),
            Decision::Member
        );
        assert_eq!(
            classify_word(0.99, NegativeOneSided, 1e-12),
            Decision::Nonmember
        );
        assert_eq!(
            classify_word(0.9, NegativeOneSidedBounded(0.65), 1e-12),
            Decision::Undetermined
        );
    }

    #[test]
    fn parses_modes() {
        assert_eq!(
            "cutpoint:1/2".parse::<AcceptanceMode>().unwrap(),
            AcceptanceMode::CutpointStrict(0.5)
        );
        assert_eq!(
            "positive".parse::<AcceptanceMode>().unwrap(),
            AcceptanceMode::PositiveOneSided
        );
        assert!("bounded:0.6".parse::<AcceptanceMode>().is_err());
        assert!("bounded".parse::<AcceptanceMode>().is_err());
        assert!("majority".parse::<AcceptanceMode>().is_err());
    }
}
