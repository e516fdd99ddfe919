//! JSON automaton files: one machine per file, tagged by `model`.
//!
//! Numeric entries are JSON numbers, `"p/q"` strings, or `[re, im]` pairs.
//! Transitions are keyed by letter, with `"lend"`/`"rend"` for the
//! end-markers; omitted end-marker transitions default to the identity.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::alphabet::{Alphabet, LEFT_END, LEFT_END_KEY, RIGHT_END_KEY};
use crate::classical::{Gfa, Pfa};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::Real;
use crate::oneway::{GeneralQfa, Kwqfa, Mcqfa};
use crate::quantum::{BasisPartition, CMatrix, KrausOperator, Superoperator};
use crate::twoway::kwqfa::{LocalTransition, Move, TwoWayKwqfa};
use crate::twoway::tqcfa::{QuantumAction, Rule, Tqcfa};

pub type RawMatrix = Vec<Vec<Value>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum AutomatonFile {
    Dfa(DfaFile),
    Pfa(MatrixFile),
    Gfa(GfaFile),
    Mcqfa(MatrixFile),
    Kwqfa(MatrixFile),
    Qfa(QfaFile),
    #[serde(rename = "twoway-kwqfa")]
    TwowayKwqfa(TwoWayFile),
    Tqcfa(TqcfaFile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfaFile {
    pub alphabet: String,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    pub accepting: Vec<String>,
    pub transitions: BTreeMap<String, BTreeMap<String, String>>,
}

/// Shared by `pfa`, `mcqfa` and `kwqfa`; `rejecting` is only meaningful for
/// `kwqfa`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub alphabet: String,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    pub accepting: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejecting: Vec<String>,
    pub transitions: BTreeMap<String, RawMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfaFile {
    pub alphabet: String,
    pub states: Vec<String>,
    pub initial_vector: Vec<Value>,
    pub final_vector: Vec<Value>,
    pub transitions: BTreeMap<String, RawMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KrausEntry {
    Plain(RawMatrix),
    Weighted { weight: Value, matrix: RawMatrix },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfaFile {
    pub alphabet: String,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    pub accepting: Vec<String>,
    pub transitions: BTreeMap<String, Vec<KrausEntry>>,
}

/// `[target, move, amplitude]`.
pub type LocalFile = (String, Move, Value);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoWayFile {
    pub alphabet: String,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    pub accepting: Vec<String>,
    pub rejecting: Vec<String>,
    /// Allow left moves.
    #[serde(default)]
    pub two_way: bool,
    /// symbol → source state → `[target, move, amplitude]` terms.
    pub transitions: BTreeMap<String, BTreeMap<String, Vec<LocalFile>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TqcfaFile {
    pub alphabet: String,
    pub states: Vec<String>,
    pub quantum_dim: usize,
    pub initial: String,
    pub accept: String,
    pub reject: String,
    pub rules: Vec<RuleFile>,
}

/// Exactly one of `unitary` and `measure` is present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    pub state: String,
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<(String, Vec<usize>)>>,
    pub branches: Vec<(String, Move)>,
}

/// A validated machine of any model.
#[derive(Clone, Debug, PartialEq)]
pub enum Machine<R: Real> {
    Dfa(Pfa<R>),
    Pfa(Pfa<R>),
    Gfa(Gfa<R>),
    Mcqfa(Mcqfa<R>),
    Kwqfa(Kwqfa<R>),
    Qfa(GeneralQfa<R>),
    TwoWayKwqfa(TwoWayKwqfa),
    Tqcfa(Tqcfa),
}

impl<R: Real> Machine<R> {
    pub fn model(&self) -> &'static str {
        match self {
            Machine::Dfa(_) => "dfa",
            Machine::Pfa(_) => "pfa",
            Machine::Gfa(_) => "gfa",
            Machine::Mcqfa(_) => "mcqfa",
            Machine::Kwqfa(_) => "kwqfa",
            Machine::Qfa(_) => "qfa",
            Machine::TwoWayKwqfa(_) => "twoway-kwqfa",
            Machine::Tqcfa(_) => "tqcfa",
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Machine::Dfa(m) | Machine::Pfa(m) => m.alphabet(),
            Machine::Gfa(m) => m.alphabet(),
            Machine::Mcqfa(m) => m.alphabet(),
            Machine::Kwqfa(m) => m.alphabet(),
            Machine::Qfa(m) => m.alphabet(),
            Machine::TwoWayKwqfa(m) => m.alphabet(),
            Machine::Tqcfa(m) => m.alphabet(),
        }
    }
}

fn field_err<T>(field: &str, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Parse(format!("field '{field}': {msg}")))
}

fn parse_real<R: Real>(v: &Value, field: &str) -> Result<R> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => {
            return field_err(
                field,
                format!("expected a number or \"p/q\" string, found {v}"),
            )
        }
    };
    R::parse_str(&text).or_else(|e| field_err(field, e))
}

fn parse_complex<R: Real>(v: &Value, field: &str) -> Result<Complex<R>> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(Complex::new(
            parse_real(&pair[0], &format!("{field}[0]"))?,
            parse_real(&pair[1], &format!("{field}[1]"))?,
        )),
        Value::Array(_) => field_err(field, "complex entries are [re, im] pairs"),
        _ => Ok(Complex::new(parse_real(v, field)?, R::zero())),
    }
}

fn parse_matrix<T: crate::numeric::Scalar>(
    raw: &RawMatrix,
    n: usize,
    field: &str,
    entry: impl Fn(&Value, &str) -> Result<T>,
) -> Result<Matrix<T>> {
    if raw.len() != n || raw.iter().any(|r| r.len() != n) {
        return field_err(field, format!("expected a {n}x{n} matrix"));
    }
    let rows = raw
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| entry(v, &format!("{field}[{i}][{j}]")))
                .collect()
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    Matrix::from_rows(rows)
}

fn parse_alphabet(s: &str) -> Result<Alphabet> {
    let letters: Vec<char> = s.chars().collect();
    if letters.iter().any(|c| !c.is_alphanumeric()) {
        return field_err("alphabet", "letters must be alphanumeric");
    }
    Alphabet::new(letters).or_else(|e| field_err("alphabet", e))
}

struct Names<'a> {
    names: &'a [String],
    field: &'static str,
}

impl<'a> Names<'a> {
    fn new(names: &'a [String], field: &'static str) -> Result<Self> {
        if names.is_empty() {
            return field_err(field, "no states");
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return field_err(field, format!("state '{n}' listed twice"));
            }
        }
        Ok(Names { names, field })
    }

    fn index(&self, name: &str, field: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).map_or_else(
            || field_err(field, format!("'{name}' is not in '{}'", self.field)),
            Ok,
        )
    }

    fn indices(&self, names: &[String], field: &str) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index(n, field)).collect()
    }

    fn check_initial(&self, initial: &Option<String>) -> Result<()> {
        match initial {
            Some(s) if *s != self.names[0] => field_err(
                "initial",
                "the initial state must be listed first in 'states'",
            ),
            Some(s) => self.index(s, "initial").map(|_| ()),
            None => Ok(()),
        }
    }
}

/// Per tape symbol, in symbol order; `default` fills absent end-markers.
fn by_symbol<T, O>(
    alphabet: &Alphabet,
    table: &BTreeMap<String, T>,
    default: Option<&T>,
    mut convert: impl FnMut(&T, &str) -> Result<O>,
) -> Result<Vec<O>> {
    for key in table.keys() {
        alphabet
            .symbol_from_key(key)
            .or_else(|e| field_err(&format!("transitions.{key}"), e))?;
    }
    (0..alphabet.symbol_count())
        .map(|s| {
            let key = alphabet.symbol_key(s);
            let field = format!("transitions.{key}");
            match (table.get(&key), default) {
                (Some(t), _) => convert(t, &field),
                (None, Some(d)) if s == LEFT_END || s == alphabet.right_end() => convert(d, &field),
                _ => field_err(&field, "missing transition"),
            }
        })
        .collect()
}

fn identity_raw(n: usize) -> RawMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| Value::from(u8::from(i == j))).collect())
        .collect()
}

/// Builds and validates the machine described by `file`.
pub fn build_machine<R: Real>(file: &AutomatonFile, tol: f64) -> Result<Machine<R>> {
    match file {
        AutomatonFile::Dfa(f) => {
            let ab = parse_alphabet(&f.alphabet)?;
            let names = Names::new(&f.states, "states")?;
            names.check_initial(&f.initial)?;
            let n = f.states.len();
            let id: BTreeMap<String, String> =
                f.states.iter().map(|s| (s.clone(), s.clone())).collect();
            let delta = by_symbol(
                &ab,
                &f.transitions,
                Some(&id),
                |row: &BTreeMap<String, String>, field: &str| {
                    let mut out = vec![usize::MAX; n];
                    for (from, to) in row {
                        out[names.index(from, field)?] =
                            names.index(to, &format!("{field}.{from}"))?;
                    }
                    match out.iter().position(|&t| t == usize::MAX) {
                        Some(q) => {
                            field_err(field, format!("no successor for state '{}'", f.states[q]))
                        }
                        None => Ok(out),
                    }
                },
            )?;
            let acc = names.indices(&f.accepting, "accepting")?;
            Ok(Machine::Dfa(Pfa::from_dfa(ab, n, &delta, acc)?))
        }
        AutomatonFile::Pfa(f) | AutomatonFile::Mcqfa(f) | AutomatonFile::Kwqfa(f) => {
            let ab = parse_alphabet(&f.alphabet)?;
            let names = Names::new(&f.states, "states")?;
            names.check_initial(&f.initial)?;
            let n = f.states.len();
            let acc = names.indices(&f.accepting, "accepting")?;
            let rej = names.indices(&f.rejecting, "rejecting")?;
            let id = identity_raw(n);
            match file {
                AutomatonFile::Pfa(_) => {
                    if !rej.is_empty() {
                        return field_err("rejecting", "not used by model 'pfa'");
                    }
                    let ms = by_symbol(
                        &ab,
                        &f.transitions,
                        Some(&id),
                        |m: &RawMatrix, field: &str| parse_matrix(m, n, field, parse_real::<R>),
                    )?;
                    Ok(Machine::Pfa(Pfa::new(ab, ms, acc, tol)?))
                }
                _ => {
                    let us = by_symbol(
                        &ab,
                        &f.transitions,
                        Some(&id),
                        |m: &RawMatrix, field: &str| parse_matrix(m, n, field, parse_complex::<R>),
                    )?;
                    if matches!(file, AutomatonFile::Mcqfa(_)) {
                        if !rej.is_empty() {
                            return field_err("rejecting", "not used by model 'mcqfa'");
                        }
                        Ok(Machine::Mcqfa(Mcqfa::new(ab, us, acc, tol)?))
                    } else {
                        Ok(Machine::Kwqfa(Kwqfa::new(ab, us, acc, rej, tol)?))
                    }
                }
            }
        }
        AutomatonFile::Gfa(f) => {
            let ab = parse_alphabet(&f.alphabet)?;
            Names::new(&f.states, "states")?;
            let n = f.states.len();
            let id = identity_raw(n);
            let ms = by_symbol(
                &ab,
                &f.transitions,
                Some(&id),
                |m: &RawMatrix, field: &str| parse_matrix(m, n, field, parse_real::<R>),
            )?;
            let vec_of = |v: &[Value], field: &str| -> Result<Vec<R>> {
                v.iter()
                    .enumerate()
                    .map(|(i, x)| parse_real(x, &format!("{field}[{i}]")))
                    .collect()
            };
            let init = vec_of(&f.initial_vector, "initial_vector")?;
            let fin = vec_of(&f.final_vector, "final_vector")?;
            Ok(Machine::Gfa(Gfa::new(ab, ms, init, fin)?))
        }
        AutomatonFile::Qfa(f) => {
            let ab = parse_alphabet(&f.alphabet)?;
            let names = Names::new(&f.states, "states")?;
            names.check_initial(&f.initial)?;
            let n = f.states.len();
            let id = vec![KrausEntry::Plain(identity_raw(n))];
            let chans = by_symbol(
                &ab,
                &f.transitions,
                Some(&id),
                |ks: &Vec<KrausEntry>, field: &str| {
                    let ops = ks
                        .iter()
                        .enumerate()
                        .map(|(i, k)| {
                            let field = format!("{field}[{i}]");
                            match k {
                                KrausEntry::Plain(m) => Ok(KrausOperator::plain(parse_matrix(
                                    m,
                                    n,
                                    &field,
                                    parse_complex::<R>,
                                )?)),
                                KrausEntry::Weighted { weight, matrix } => {
                                    let w: R = parse_real(weight, &format!("{field}.weight"))?;
                                    if w < R::zero() {
                                        return field_err(
                                            &format!("{field}.weight"),
                                            "negative weight",
                                        );
                                    }
                                    Ok(KrausOperator::weighted(
                                        w,
                                        parse_matrix(matrix, n, &field, parse_complex::<R>)?,
                                    ))
                                }
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Superoperator::new(ops)
                },
            )?;
            let acc = names.indices(&f.accepting, "accepting")?;
            Ok(Machine::Qfa(GeneralQfa::new(ab, chans, acc, tol)?))
        }
        AutomatonFile::TwowayKwqfa(f) => {
            let ab = parse_alphabet(&f.alphabet)?;
            let names = Names::new(&f.states, "states")?;
            names.check_initial(&f.initial)?;
            let n = f.states.len();
            let empty = BTreeMap::new();
            let table = by_symbol(
                &ab,
                &f.transitions,
                Some(&empty),
                |row: &BTreeMap<String, Vec<(String, Move, Value)>>, field: &str| {
                    let mut out = vec![Vec::new(); n];
                    for (from, terms) in row {
                        let q = names.index(from, field)?;
                        for (i, (to, mv, amp)) in terms.iter().enumerate() {
                            let at = format!("{field}.{from}[{i}]");
                            let target = names.index(to, &at)?;
                            out[q].push(LocalTransition::new(
                                target,
                                *mv,
                                parse_complex::<f64>(amp, &at)?,
                            ));
                        }
                    }
                    Ok(out)
                },
            )?;
            let acc = names.indices(&f.accepting, "accepting")?;
            let rej = names.indices(&f.rejecting, "rejecting")?;
            Ok(Machine::TwoWayKwqfa(TwoWayKwqfa::new(
                ab,
                f.states.clone(),
                0,
                acc,
                rej,
                !f.two_way,
                table,
            )?))
        }
        AutomatonFile::Tqcfa(f) => {
            let ab = parse_alphabet(&f.alphabet)?;
            let names = Names::new(&f.states, "states")?;
            let d = f.quantum_dim;
            let mut rules = BTreeMap::new();
            for (i, r) in f.rules.iter().enumerate() {
                let field = format!("rules[{i}]");
                let s = names.index(&r.state, &format!("{field}.state"))?;
                let sym = ab
                    .symbol_from_key(&r.symbol)
                    .or_else(|e| field_err(&format!("{field}.symbol"), e))?;
                let action = match (&r.unitary, &r.measure) {
                    (Some(u), None) => QuantumAction::Unitary(parse_matrix(
                        u,
                        d,
                        &format!("{field}.unitary"),
                        parse_complex::<f64>,
                    )?),
                    (None, Some(blocks)) => {
                        QuantumAction::Measure(BasisPartition::new(d, blocks.clone())?)
                    }
                    _ => {
                        return field_err(
                            &field,
                            "exactly one of 'unitary' and 'measure' is required",
                        )
                    }
                };
                let branches = r
                    .branches
                    .iter()
                    .map(|(t, mv)| Ok((names.index(t, &format!("{field}.branches"))?, *mv)))
                    .collect::<Result<Vec<_>>>()?;
                if rules.insert((s, sym), Rule { action, branches }).is_some() {
                    return field_err(
                        &field,
                        format!("second rule for ({}, {})", r.state, r.symbol),
                    );
                }
            }
            let idx = |s: &str, field: &str| names.index(s, field);
            Ok(Machine::Tqcfa(Tqcfa::new(
                ab,
                f.states.clone(),
                d,
                idx(&f.initial, "initial")?,
                idx(&f.accept, "accept")?,
                idx(&f.reject, "reject")?,
                rules,
            )?))
        }
    }
}

pub fn parse_automaton_str<R: Real>(text: &str, tol: f64) -> Result<Machine<R>> {
    let file: AutomatonFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    build_machine(&file, tol)
}

/// Reads, parses and validates an automaton file.
pub fn parse_automaton<R: Real>(path: impl AsRef<Path>, tol: f64) -> Result<Machine<R>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    parse_automaton_str(&text, tol).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn real_value<R: Real>(x: &R) -> Value {
    if R::EXACT {
        Value::String(x.render())
    } else {
        let f = x.to_f64();
        Number::from_f64(f).map_or(Value::Null, Value::Number)
    }
}

fn complex_value<R: Real>(z: &Complex<R>) -> Value {
    if z.im.is_zero() {
        real_value(&z.re)
    } else {
        Value::Array(vec![real_value(&z.re), real_value(&z.im)])
    }
}

fn raw<T: crate::numeric::Scalar>(m: &Matrix<T>, f: impl Fn(&T) -> Value) -> RawMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(&f).collect())
        .collect()
}

fn state_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

fn name_list(names: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| names[i].clone()).collect()
}

fn keyed<T>(alphabet: &Alphabet, items: impl IntoIterator<Item = T>) -> BTreeMap<String, T> {
    items
        .into_iter()
        .enumerate()
        .map(|(s, x)| (alphabet.symbol_key(s), x))
        .collect()
}

fn unitary_file<R: Real>(
    alphabet: &Alphabet,
    us: &[CMatrix<R>],
    acc: &[usize],
    rej: &[usize],
) -> MatrixFile {
    let names = state_names(us[0].rows());
    MatrixFile {
        alphabet: alphabet.letters().iter().collect(),
        initial: None,
        accepting: name_list(&names, acc),
        rejecting: name_list(&names, rej),
        transitions: keyed(alphabet, us.iter().map(|u| raw(u, complex_value))),
        states: names,
    }
}

/// File representation of `m`. Single-head one-way models name their states
/// `q0, q1, …`; two-way models keep their own names.
pub fn to_file<R: Real>(m: &Machine<R>) -> AutomatonFile {
    let letters = |a: &Alphabet| a.letters().iter().collect::<String>();
    match m {
        Machine::Dfa(p) => {
            let names = state_names(p.states());
            let transitions = keyed(
                p.alphabet(),
                p.transitions().iter().map(|t| {
                    (0..p.states())
                        .map(|q| {
                            let to = (0..p.states())
                                .find(|&j| t[(j, q)].is_one())
                                .expect("deterministic column");
                            (names[q].clone(), names[to].clone())
                        })
                        .collect()
                }),
            );
            AutomatonFile::Dfa(DfaFile {
                alphabet: letters(p.alphabet()),
                initial: None,
                accepting: name_list(&names, p.accepting()),
                states: names,
                transitions,
            })
        }
        Machine::Pfa(p) => {
            let names = state_names(p.states());
            AutomatonFile::Pfa(MatrixFile {
                alphabet: letters(p.alphabet()),
                initial: None,
                accepting: name_list(&names, p.accepting()),
                rejecting: Vec::new(),
                transitions: keyed(
                    p.alphabet(),
                    p.transitions().iter().map(|t| raw(t, real_value)),
                ),
                states: names,
            })
        }
        Machine::Gfa(g) => AutomatonFile::Gfa(GfaFile {
            alphabet: letters(g.alphabet()),
            states: state_names(g.states()),
            initial_vector: g.initial().iter().map(real_value).collect(),
            final_vector: g.final_vector().iter().map(real_value).collect(),
            transitions: keyed(
                g.alphabet(),
                g.transitions().iter().map(|t| raw(t, real_value)),
            ),
        }),
        Machine::Mcqfa(q) => AutomatonFile::Mcqfa(unitary_file(
            q.alphabet(),
            q.unitaries(),
            q.accepting(),
            &[],
        )),
        Machine::Kwqfa(q) => AutomatonFile::Kwqfa(unitary_file(
            q.alphabet(),
            q.unitaries(),
            q.accepting(),
            q.rejecting(),
        )),
        Machine::Qfa(q) => {
            let names = state_names(q.states());
            let transitions = keyed(
                q.alphabet(),
                q.channels().iter().map(|e| {
                    e.kraus()
                        .iter()
                        .map(|k| {
                            let matrix = raw(&k.matrix, complex_value);
                            if k.weight.is_one() {
                                KrausEntry::Plain(matrix)
                            } else {
                                KrausEntry::Weighted {
                                    weight: real_value(&k.weight),
                                    matrix,
                                }
                            }
                        })
                        .collect()
                }),
            );
            AutomatonFile::Qfa(QfaFile {
                alphabet: letters(q.alphabet()),
                initial: None,
                accepting: name_list(&names, q.accepting()),
                states: names,
                transitions,
            })
        }
        Machine::TwoWayKwqfa(t) => {
            let names = t.state_names().to_vec();
            let transitions = keyed(
                t.alphabet(),
                t.specified().iter().map(|table| {
                    table
                        .iter()
                        .enumerate()
                        .filter(|(_, terms)| !terms.is_empty())
                        .map(|(q, terms)| {
                            let terms = terms
                                .iter()
                                .map(|l| {
                                    (
                                        names[l.target].clone(),
                                        l.movement,
                                        complex_value(&l.amplitude),
                                    )
                                })
                                .collect();
                            (names[q].clone(), terms)
                        })
                        .collect::<BTreeMap<_, _>>()
                }),
            )
            .into_iter()
            .filter(|(_, row)| !row.is_empty())
            .collect();
            let mut states = names.clone();
            states.swap(0, t.initial());
            AutomatonFile::TwowayKwqfa(TwoWayFile {
                alphabet: letters(t.alphabet()),
                initial: Some(names[t.initial()].clone()),
                accepting: name_list(&names, t.accepting()),
                rejecting: name_list(&names, t.rejecting()),
                two_way: !t.is_one_and_half(),
                transitions,
                states: if t.initial() == 0 { names } else { states },
            })
        }
        Machine::Tqcfa(t) => {
            let names = t.classical_states().to_vec();
            let rules = t
                .rules()
                .iter()
                .map(|(&(s, sym), r)| {
                    let (unitary, measure) = match &r.action {
                        QuantumAction::Unitary(u) => (Some(raw(u, complex_value::<f64>)), None),
                        QuantumAction::Measure(p) => (None, Some(p.blocks().to_vec())),
                    };
                    RuleFile {
                        state: names[s].clone(),
                        symbol: t.alphabet().symbol_key(sym),
                        unitary,
                        measure,
                        branches: r
                            .branches
                            .iter()
                            .map(|&(n, mv)| (names[n].clone(), mv))
                            .collect(),
                    }
                })
                .collect();
            AutomatonFile::Tqcfa(TqcfaFile {
                alphabet: letters(t.alphabet()),
                quantum_dim: t.quantum_dim(),
                initial: names[t.initial()].clone(),
                accept: names[t.accept_state()].clone(),
                reject: names[t.reject_state()].clone(),
                states: names,
                rules,
            })
        }
    }
}

pub fn serialize_automaton<R: Real>(m: &Machine<R>) -> String {
    serde_json::to_string_pretty(&to_file(m)).expect("JSON values serialize")
}

/// Reserved symbol keys, for documentation and help output.
pub const END_MARKER_KEYS: [&str; 2] = [LEFT_END_KEY, RIGHT_END_KEY];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;
    use crate::oneway::build_modp_2state;

    const PFA: &str = r#"{
      "model": "pfa", "alphabet": "ab", "states": ["s", "t"], "accepting": ["t"],
      "transitions": {
        "a": [["1/2", 0], ["1/2", 1]],
        "b": [[0.4, 0], [0.5, 1]]
      }
    }"#;

    #[test]
    fn pfa_column_defect_is_named() {
        let err = parse_automaton_str::<f64>(PFA, 1e-9).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("column 0 of transition 'b'"), "{msg}");
        assert!(matches!(err, Error::Validation { defect, .. } if (defect - 0.1).abs() < 1e-12));
    }

    #[test]
    fn unknown_model_and_fields() {
        let bad = PFA.replace("\"pfa\"", "\"nfa\"");
        assert!(matches!(
            parse_automaton_str::<f64>(&bad, 1e-9),
            Err(Error::Parse(_))
        ));
        let extra = PFA.replace("\"accepting\"", "\"colour\": 1, \"accepting\"");
        let err = parse_automaton_str::<f64>(&extra, 1e-9)
            .unwrap_err()
            .to_string();
        assert!(err.contains("colour"), "{err}");
        let missing = PFA.replace("\"b\": [[0.4, 0], [0.5, 1]]", "\"rend\": [[1, 0], [0, 1]]");
        let err = parse_automaton_str::<f64>(&missing, 1e-9)
            .unwrap_err()
            .to_string();
        assert!(err.contains("transitions.b"), "{err}");
    }

    #[test]
    fn exact_decimals() {
        let ok = PFA.replace("[0.4, 0]", "[0.5, 0]");
        let Machine::Pfa(p) = parse_automaton_str::<Rational>(&ok, 0.0).unwrap() else {
            panic!()
        };
        assert_eq!(p.accept_prob("b").unwrap(), Rational::from_ratio(1, 2));
    }

    #[test]
    fn mcqfa_round_trip() {
        let m: Machine<f64> = Machine::Mcqfa(build_modp_2state(5, 1).unwrap());
        let text = serialize_automaton(&m);
        let back = parse_automaton_str::<f64>(&text, 1e-9).unwrap();
        let (Machine::Mcqfa(a), Machine::Mcqfa(b)) = (&m, &back) else {
            panic!()
        };
        for j in 0..12 {
            let w = "a".repeat(j);
            assert!((a.accept_prob(&w).unwrap() - b.accept_prob(&w).unwrap()).abs() < 1e-15);
        }
    }
}
