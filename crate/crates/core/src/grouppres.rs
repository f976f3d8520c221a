//! Finitely presented groups and their abelianization.
//!
//! Grammar (whitespace insignificant, `#` starts a comment running to end of line):
//!
//! ```text
//! presentation := '<' genlist '|' relatorlist? '>'
//! genlist      := name (',' name)*
//! relatorlist  := relation (',' relation)*
//! relation     := word ('=' word)?
//! word         := factor ('*' factor)*
//! factor       := name ('^' signed-integer)?
//!               | '[' word ',' word ']'
//!               | '(' word ')' ('^' signed-integer)?
//! name         := [A-Za-z][A-Za-z0-9_]*
//! ```
//!
//! `[x,y]` expands to `x y x^-1 y^-1` and `w1 = w2` becomes the relator
//! `w1 w2^-1`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::linalg::{rank, smith_normal_form, IntMatrix};

/// Upper bound on the number of syllables in one expanded word.
pub const MAX_WORD_SYLLABLES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub generator: usize,
    pub exponent: i64,
}

/// Freely reduced product of generator powers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    syllables: Vec<Syllable>,
}

#[derive(Debug)]
enum WordOverflow {
    Exponent,
    Length,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(generator: usize, exponent: i64) -> Self {
        let mut w = Word::default();
        if exponent != 0 {
            w.syllables.push(Syllable {
                generator,
                exponent,
            });
        }
        w
    }

    /// Builds a word from raw syllables, merging neighbours and dropping zeros.
    ///
    /// Panics if a merged exponent overflows `i64`.
    pub fn from_syllables(syllables: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut w = Word::default();
        for (g, e) in syllables {
            w.push(Syllable {
                generator: g,
                exponent: e,
            })
            .expect("exponent overflow");
        }
        w
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    fn push(&mut self, s: Syllable) -> Result<(), WordOverflow> {
        if s.exponent == 0 {
            return Ok(());
        }
        if let Some(last) = self.syllables.last_mut() {
            if last.generator == s.generator {
                last.exponent = last
                    .exponent
                    .checked_add(s.exponent)
                    .ok_or(WordOverflow::Exponent)?;
                if last.exponent == 0 {
                    self.syllables.pop();
                }
                return Ok(());
            }
        }
        if self.syllables.len() >= MAX_WORD_SYLLABLES {
            return Err(WordOverflow::Length);
        }
        self.syllables.push(s);
        Ok(())
    }

    fn append(&mut self, other: &Word) -> Result<(), WordOverflow> {
        for &s in &other.syllables {
            self.push(s)?;
        }
        Ok(())
    }

    fn try_inverse(&self) -> Result<Word, WordOverflow> {
        let mut out = Word::default();
        for s in self.syllables.iter().rev() {
            out.push(Syllable {
                generator: s.generator,
                exponent: s.exponent.checked_neg().ok_or(WordOverflow::Exponent)?,
            })?;
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Word {
        self.try_inverse().expect("exponent overflow")
    }

    fn try_pow(&self, k: i64) -> Result<Word, WordOverflow> {
        let base = if k < 0 { self.try_inverse()? } else { self.clone() };
        let times = k.unsigned_abs();
        if let [s] = base.syllables.as_slice() {
            let e = i64::try_from(times)
                .ok()
                .and_then(|t| s.exponent.checked_mul(t))
                .ok_or(WordOverflow::Exponent)?;
            return Ok(Word::generator(s.generator, e));
        }
        let mut out = Word::default();
        if base.is_identity() {
            return Ok(out);
        }
        if (base.syllables.len() as u64).saturating_mul(times) > MAX_WORD_SYLLABLES as u64 {
            return Err(WordOverflow::Length);
        }
        for _ in 0..times {
            out.append(&base)?;
        }
        Ok(out)
    }

    /// Total exponent of each generator, indexed by generator.
    pub fn exponent_sums(&self, generators: usize) -> Vec<BigInt> {
        let mut sums = vec![BigInt::default(); generators];
        for s in &self.syllables {
            sums[s.generator] += s.exponent;
        }
        sums
    }

    /// Cyclic rotation by `k` syllables (as a relator, the same relation).
    pub fn rotate(&self, k: usize) -> Word {
        if self.syllables.is_empty() {
            return self.clone();
        }
        let k = k % self.syllables.len();
        let mut out = Word::default();
        for s in self.syllables[k..].iter().chain(&self.syllables[..k]) {
            out.push(*s).expect("exponent overflow");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self, PresentationError> {
        for (i, g) in generators.iter().enumerate() {
            if !is_identifier(g) {
                return Err(PresentationError::Syntax {
                    line: 1,
                    col: 1,
                    message: format!("invalid generator name `{g}`"),
                });
            }
            if generators[..i].contains(g) {
                return Err(PresentationError::DuplicateGenerator(g.clone()));
            }
        }
        for w in &relators {
            if let Some(s) = w.syllables.iter().find(|s| s.generator >= generators.len()) {
                return Err(PresentationError::UnknownGenerator(format!("#{}", s.generator)));
            }
        }
        Ok(Presentation {
            generators,
            relators,
        })
    }

    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        Parser::new(text).presentation()
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn with_relators(&self, relators: Vec<Word>) -> Result<Presentation, PresentationError> {
        Presentation::new(self.generators.clone(), relators)
    }

    pub fn with_generator_names(&self, names: Vec<String>) -> Result<Presentation, PresentationError> {
        assert_eq!(names.len(), self.generators.len());
        Presentation::new(names, self.relators.clone())
    }

    fn fmt_word(&self, w: &Word, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if w.is_identity() {
            // `g^0` is the identity; any generator will do, and there is at
            // least one because the word came from somewhere.
            return match self.generators.first() {
                Some(g) => write!(f, "{g}^0"),
                None => Ok(()),
            };
        }
        for (i, s) in w.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            let name = &self.generators[s.generator];
            if s.exponent == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{}", s.exponent)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "< {} |", self.generators.join(", "))?;
        for (i, w) in self.relators.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            self.fmt_word(w, f)?;
        }
        f.write_str(" >")
    }
}

impl FromStr for Presentation {
    type Err = PresentationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Presentation::parse(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Sym(char),
    Name(String),
    Int(String),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    generators: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            pos: 0,
            generators: Vec::new(),
        }
    }

    fn line_col(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(before, |i| &before[i + 1..]).chars().count() + 1;
        (line, col)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> PresentationError {
        let (line, col) = self.line_col(pos);
        PresentationError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            let rest = &self.src[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                return;
            }
        }
    }

    /// Returns the next token and its start offset without consuming it.
    fn peek(&mut self) -> (Tok, usize) {
        self.skip_trivia();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return (Tok::End, start);
        };
        let tok = if c.is_ascii_alphabetic() {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            Tok::Name(rest[..len].to_string())
        } else if c.is_ascii_digit() {
            let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            Tok::Int(rest[..len].to_string())
        } else {
            Tok::Sym(c)
        };
        (tok, start)
    }

    fn bump(&mut self, tok: &Tok) {
        self.pos += match tok {
            Tok::Sym(c) => c.len_utf8(),
            Tok::Name(s) | Tok::Int(s) => s.len(),
            Tok::End => 0,
        };
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Name(s) => format!("name `{s}`"),
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::End => "end of input".into(),
        }
    }

    fn expect_sym(&mut self, want: char) -> Result<(), PresentationError> {
        let (tok, at) = self.peek();
        if tok == Tok::Sym(want) {
            self.bump(&tok);
            Ok(())
        } else {
            Err(self.error_at(at, format!("expected `{want}`, found {}", Self::describe(&tok))))
        }
    }

    fn eat_sym(&mut self, want: char) -> bool {
        let (tok, _) = self.peek();
        if tok == Tok::Sym(want) {
            self.bump(&tok);
            true
        } else {
            false
        }
    }

    fn presentation(mut self) -> Result<Presentation, PresentationError> {
        self.expect_sym('<')?;
        loop {
            let (tok, at) = self.peek();
            let Tok::Name(name) = &tok else {
                return Err(self.error_at(
                    at,
                    format!("expected generator name, found {}", Self::describe(&tok)),
                ));
            };
            if self.generators.contains(name) {
                return Err(PresentationError::DuplicateGenerator(name.clone()));
            }
            self.generators.push(name.clone());
            self.bump(&tok);
            if !self.eat_sym(',') {
                break;
            }
        }
        self.expect_sym('|')?;
        let mut relators = Vec::new();
        if !self.eat_sym('>') {
            loop {
                relators.push(self.relation()?);
                if !self.eat_sym(',') {
                    break;
                }
            }
            self.expect_sym('>')?;
        }
        let (tok, at) = self.peek();
        if tok != Tok::End {
            return Err(self.error_at(at, format!("unexpected {} after `>`", Self::describe(&tok))));
        }
        Ok(Presentation {
            generators: self.generators,
            relators,
        })
    }

    fn overflow(&self, at: usize, e: WordOverflow) -> PresentationError {
        match e {
            WordOverflow::Exponent => self.error_at(at, "exponent out of range"),
            WordOverflow::Length => self.error_at(
                at,
                format!("expanded word exceeds {MAX_WORD_SYLLABLES} syllables"),
            ),
        }
    }

    fn relation(&mut self) -> Result<Word, PresentationError> {
        let (_, at) = self.peek();
        let mut lhs = self.word()?;
        if self.eat_sym('=') {
            let rhs = self.word()?;
            let inv = rhs.try_inverse().map_err(|e| self.overflow(at, e))?;
            lhs.append(&inv).map_err(|e| self.overflow(at, e))?;
        }
        Ok(lhs)
    }

    fn word(&mut self) -> Result<Word, PresentationError> {
        let mut w = self.factor()?;
        loop {
            let (_, at) = self.peek();
            if !self.eat_sym('*') {
                return Ok(w);
            }
            let f = self.factor()?;
            w.append(&f).map_err(|e| self.overflow(at, e))?;
        }
    }

    fn exponent(&mut self) -> Result<Option<i64>, PresentationError> {
        if !self.eat_sym('^') {
            return Ok(None);
        }
        let negative = if self.eat_sym('-') {
            true
        } else {
            self.eat_sym('+');
            false
        };
        let (tok, at) = self.peek();
        let Tok::Int(digits) = &tok else {
            return Err(self.error_at(at, format!("expected exponent, found {}", Self::describe(&tok))));
        };
        let text = if negative { format!("-{digits}") } else { digits.clone() };
        let value = text
            .parse::<i64>()
            .map_err(|_| self.error_at(at, format!("exponent `{text}` out of range")))?;
        self.bump(&tok);
        Ok(Some(value))
    }

    fn factor(&mut self) -> Result<Word, PresentationError> {
        let (tok, at) = self.peek();
        match &tok {
            Tok::Name(name) => {
                let Some(g) = self.generators.iter().position(|x| x == name) else {
                    return Err(PresentationError::UnknownGenerator(name.clone()));
                };
                self.bump(&tok);
                let e = self.exponent()?.unwrap_or(1);
                Ok(Word::generator(g, e))
            }
            Tok::Sym('[') => {
                self.bump(&tok);
                let x = self.word()?;
                self.expect_sym(',')?;
                let y = self.word()?;
                self.expect_sym(']')?;
                let mut out = x.clone();
                let res = (|| {
                    out.append(&y)?;
                    out.append(&x.try_inverse()?)?;
                    out.append(&y.try_inverse()?)
                })();
                res.map_err(|e| self.overflow(at, e))?;
                Ok(out)
            }
            Tok::Sym('(') => {
                self.bump(&tok);
                let w = self.word()?;
                self.expect_sym(')')?;
                match self.exponent()? {
                    Some(k) => w.try_pow(k).map_err(|e| self.overflow(at, e)),
                    None => Ok(w),
                }
            }
            _ => Err(self.error_at(
                at,
                format!("expected generator, `[` or `(`, found {}", Self::describe(&tok)),
            )),
        }
    }
}

/// Abelianized exponent-sum matrix: rows are relators, columns generators.
pub fn relation_matrix(p: &Presentation) -> IntMatrix {
    let n = p.generators.len();
    let rows = p.relators.iter().map(|w| w.exponent_sums(n)).collect();
    IntMatrix::try_from_rows(rows)
        .map(|m| if p.relators.is_empty() { IntMatrix::zeros(0, n) } else { m })
        .expect("exponent sums have one entry per generator")
}

/// Invariant-factor decomposition ℤ^free_rank ⊕ ⊕ ℤ/torsion[i].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// Invariant factors ≥ 2, each dividing the next.
    pub torsion: Vec<BigInt>,
}

/// Renders as `Z^2 + Z/2 + Z/4`; the trivial group is `0`.
impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Abelian invariants of the group, i.e. of the cokernel of the relation
/// matrix acting on ℤ^generators.
pub fn abelian_invariants(p: &Presentation) -> AbelianInvariants {
    let m = relation_matrix(p);
    let snf = smith_normal_form(&m);
    AbelianInvariants {
        free_rank: p.generators.len() - snf.rank(),
        torsion: snf.d.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// First Betti number: rank of the abelianization.
pub fn first_betti(p: &Presentation) -> usize {
    p.generators.len() - rank(&relation_matrix(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const C2_MODEL: &str = "< t1,t2,t3,al | [t1,t2], [t1,t3], [t2,t3], al^2 = t1, \
                                       al*t2*al^-1 = t2^-1, al*t3*al^-1 = t3^-1 >";

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn parses_commutator() {
        let p = Presentation::parse("< a, b | [a,b] >").unwrap();
        assert_eq!(p.generators(), ["a", "b"]);
        assert_eq!(
            p.relators(),
            [Word::from_syllables([(0, 1), (1, 1), (0, -1), (1, -1)])]
        );
    }

    #[test]
    fn parses_power() {
        let p = Presentation::parse("< a | a^2 >").unwrap();
        assert_eq!(p.relators(), [Word::generator(0, 2)]);
        assert_eq!(relation_matrix(&p), IntMatrix::from_rows(&[[2]]));
    }

    #[test]
    fn parses_c2_model() {
        let p = Presentation::parse(C2_MODEL).unwrap();
        assert_eq!(p.generators().len(), 4);
        assert_eq!(p.relators().len(), 6);
        assert_eq!(
            relation_matrix(&p),
            IntMatrix::from_rows(&[
                [0, 0, 0, 0],
                [0, 0, 0, 0],
                [0, 0, 0, 0],
                [-1, 0, 0, 2],
                [0, 2, 0, 0],
                [0, 0, 2, 0],
            ])
        );
    }

    #[test]
    fn relation_becomes_lhs_times_inverse_rhs() {
        let p = Presentation::parse("< a, b | a*b = b^2*a >").unwrap();
        assert_eq!(
            p.relators(),
            [Word::from_syllables([(0, 1), (1, 1), (0, -1), (1, -2)])]
        );
    }

    #[test]
    fn parenthesized_powers_and_cancellation() {
        let p = Presentation::parse("< a, b | (a*b)^-2, a*a^-1, (a)^0 >").unwrap();
        assert_eq!(
            p.relators()[0],
            Word::from_syllables([(1, -1), (0, -1), (1, -1), (0, -1)])
        );
        assert!(p.relators()[1].is_identity());
        assert!(p.relators()[2].is_identity());
    }

    #[test]
    fn comments_and_whitespace() {
        let text = "# the free abelian group\n<\n  x_1 , y # gens\n | [x_1 ,y] >\n";
        let p = Presentation::parse(text).unwrap();
        assert_eq!(p.generators(), ["x_1", "y"]);
    }

    #[test]
    fn free_group_without_relators() {
        let p = Presentation::parse("< a, b, c | >").unwrap();
        assert!(p.relators().is_empty());
        assert_eq!(relation_matrix(&p).shape(), (0, 3));
        assert_eq!(first_betti(&p), 3);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = Presentation::parse("< a, b |\n a^ >").unwrap_err();
        assert_eq!(
            err,
            PresentationError::Syntax {
                line: 2,
                col: 5,
                message: "expected exponent, found `>`".into()
            }
        );
        assert!(matches!(
            Presentation::parse("< a | a"),
            Err(PresentationError::Syntax { line: 1, col: 8, .. })
        ));
        assert!(matches!(
            Presentation::parse("< 1a | >"),
            Err(PresentationError::Syntax { col: 3, .. })
        ));
        assert!(matches!(
            Presentation::parse("< a | a > junk"),
            Err(PresentationError::Syntax { col: 11, .. })
        ));
        assert!(matches!(
            Presentation::parse("< a | a^99999999999999999999 >"),
            Err(PresentationError::Syntax { .. })
        ));
    }

    #[test]
    fn unknown_and_duplicate_generators() {
        assert_eq!(
            Presentation::parse("< a | b >"),
            Err(PresentationError::UnknownGenerator("b".into()))
        );
        assert_eq!(
            Presentation::parse("< a, a | >"),
            Err(PresentationError::DuplicateGenerator("a".into()))
        );
    }

    #[test]
    fn huge_expansion_is_rejected() {
        let err = Presentation::parse("< a, b | (a*b)^1000000000 >").unwrap_err();
        assert!(matches!(err, PresentationError::Syntax { .. }));
        // single-syllable powers just scale the exponent
        let p = Presentation::parse("< a | (a^3)^1000000000 >").unwrap();
        assert_eq!(p.relators(), [Word::generator(0, 3_000_000_000)]);
    }

    #[test]
    fn abelian_invariants_examples() {
        let z2 = abelian_invariants(&"< a, b | [a,b] >".parse().unwrap());
        assert_eq!(z2, AbelianInvariants { free_rank: 2, torsion: vec![] });
        assert_eq!(z2.to_string(), "Z^2");

        let c2 = abelian_invariants(&C2_MODEL.parse().unwrap());
        assert_eq!(c2, AbelianInvariants { free_rank: 1, torsion: ints(&[2, 2]) });
        assert_eq!(c2.to_string(), "Z + Z/2 + Z/2");

        let cyc = abelian_invariants(&"< a | a^2 >".parse().unwrap());
        assert_eq!(cyc, AbelianInvariants { free_rank: 0, torsion: ints(&[2]) });
        assert_eq!(cyc.to_string(), "Z/2");

        let trivial = abelian_invariants(&"< a | a >".parse().unwrap());
        assert_eq!(trivial.to_string(), "0");
    }

    #[test]
    fn first_betti_examples() {
        assert_eq!(first_betti(&C2_MODEL.parse().unwrap()), 1);
        assert_eq!(first_betti(&"< a | a^2 >".parse().unwrap()), 0);
    }

    #[test]
    fn display_round_trips() {
        let p: Presentation = C2_MODEL.parse().unwrap();
        let again: Presentation = p.to_string().parse().unwrap();
        assert_eq!(again, p);
        let q: Presentation = "< a | a*a^-1 >".parse().unwrap();
        assert_eq!(q.to_string().parse::<Presentation>().unwrap(), q);
    }

    #[test]
    fn rotate_is_cyclic() {
        let w = Word::from_syllables([(0, 1), (1, 2), (0, -1)]);
        assert_eq!(w.rotate(1), Word::generator(1, 2));
        assert_eq!(w.rotate(3), w);
    }
}
