use crate::error::{Error, Result};

/// Input alphabet Σ together with the end-markers ¢ and $.
///
/// Tape symbols are indexed `0` (¢), `1..=|Σ|` (letters), `|Σ|+1` ($).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<char>,
}

pub const LEFT_END: usize = 0;
pub const LEFT_END_KEY: &str = "lend";
pub const RIGHT_END_KEY: &str = "rend";

impl Alphabet {
    pub fn new(letters: Vec<char>) -> Result<Self> {
        for (i, c) in letters.iter().enumerate() {
            if letters[..i].contains(c) {
                return Err(Error::InvalidParameter(format!(
                    "letter '{c}' listed twice"
                )));
            }
        }
        Ok(Alphabet { letters })
    }

    pub fn from_letters(s: &str) -> Self {
        Alphabet::new(s.chars().collect()).expect("distinct letters")
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of tape symbols, `|Σ| + 2`.
    pub fn symbol_count(&self) -> usize {
        self.letters.len() + 2
    }

    pub fn right_end(&self) -> usize {
        self.letters.len() + 1
    }

    pub fn index_of(&self, c: char) -> Result<usize> {
        self.letters
            .iter()
            .position(|&l| l == c)
            .map(|i| i + 1)
            .ok_or_else(|| Error::Alphabet {
                symbol: c,
                alphabet: self.letters.clone(),
            })
    }

    /// Letter indices of `word` without end-markers.
    pub fn encode(&self, word: &str) -> Result<Vec<usize>> {
        word.chars().map(|c| self.index_of(c)).collect()
    }

    /// `¢ w $` as symbol indices.
    pub fn tape(&self, word: &str) -> Result<Vec<usize>> {
        let mut t = Vec::with_capacity(word.len() + 2);
        t.push(LEFT_END);
        t.extend(self.encode(word)?);
        t.push(self.right_end());
        Ok(t)
    }

    /// File key of a tape symbol: `lend`, `rend`, or the letter.
    pub fn symbol_key(&self, index: usize) -> String {
        match index {
            LEFT_END => LEFT_END_KEY.to_string(),
            i if i == self.right_end() => RIGHT_END_KEY.to_string(),
            i => self.letters[i - 1].to_string(),
        }
    }

    pub fn symbol_from_key(&self, key: &str) -> Result<usize> {
        match key {
            LEFT_END_KEY => Ok(LEFT_END),
            RIGHT_END_KEY => Ok(self.right_end()),
            k => {
                let mut chars = k.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => self.index_of(c),
                    _ => Err(Error::Parse(format!("'{k}' is not a tape symbol key"))),
                }
            }
        }
    }

    /// All words of length `<= max_len` in length-then-lexicographic order
    /// (lexicographic by alphabet position).
    pub fn words_up_to(&self, max_len: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        let mut layer = vec![String::new()];
        for _ in 0..max_len {
            let next: Vec<String> = layer
                .iter()
                .flat_map(|w| self.letters.iter().map(move |c| format!("{w}{c}")))
                .collect();
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}
