//! Words, normal forms and symmetric sets for free groups, free products of
//! cyclic groups and free abelian groups.
//!
//! Words are stored as syllables `(generator, exponent)`. In normal form
//! adjacent syllables carry different generators (free and free-product
//! families) or appear in increasing generator order (free abelian family),
//! and every exponent is nonzero. For a cyclic factor of order `m` the
//! exponent lies in the symmetric residue range `(-m/2, m/2]`, so the word
//! length equals the Cayley length with respect to the natural generators.
//!
//! Text syntax: lowercase letters name generators, uppercase letters their
//! inverses, and the single token `e` is the identity. The letter `e` is
//! reserved for the identity, so generator `i` is the `i`-th letter of
//! `abcdfgh...z` (25 generators at most).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

const ALPHABET: &[u8; 25] = b"abcdfghijklmnopqrstuvwxyz";

/// Largest number of generators the text syntax can name.
pub const MAX_GENERATORS: u32 = ALPHABET.len() as u32;

/// A generator or its inverse. Generator indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    generator: u8,
    inverted: bool,
}

impl Letter {
    pub fn new(generator_index: u32, inverted: bool) -> Self {
        assert!(
            (1..=MAX_GENERATORS).contains(&generator_index),
            "generator index {generator_index} out of range"
        );
        Letter {
            generator: generator_index as u8,
            inverted,
        }
    }

    pub fn generator_index(self) -> u32 {
        self.generator as u32
    }

    pub fn is_inverted(self) -> bool {
        self.inverted
    }

    pub fn inverse(self) -> Self {
        Letter {
            generator: self.generator,
            inverted: !self.inverted,
        }
    }

    pub fn to_char(self) -> char {
        let c = ALPHABET[self.generator as usize - 1] as char;
        if self.inverted {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        if !c.is_ascii_alphabetic() {
            return None;
        }
        let lower = c.to_ascii_lowercase() as u8;
        let pos = ALPHABET.iter().position(|&b| b == lower)?;
        Some(Letter {
            generator: pos as u8 + 1,
            inverted: c.is_ascii_uppercase(),
        })
    }
}

/// A power `g^exponent` of a single generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub generator: u8,
    pub exponent: i32,
}

/// A group word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    syllables: SmallVec<[Syllable; 6]>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn letter(letter: Letter) -> Self {
        let exponent = if letter.inverted { -1 } else { 1 };
        Word::from_syllables([Syllable {
            generator: letter.generator,
            exponent,
        }])
    }

    /// Builds a word from syllables as given; the result need not be in
    /// normal form.
    pub fn from_syllables(syllables: impl IntoIterator<Item = Syllable>) -> Self {
        Word {
            syllables: syllables.into_iter().collect(),
        }
    }

    /// Builds a word from letters, merging runs of equal generators. The
    /// result need not be in normal form.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut syllables: SmallVec<[Syllable; 6]> = SmallVec::new();
        for l in letters {
            let e = if l.inverted { -1 } else { 1 };
            match syllables.last_mut() {
                Some(s) if s.generator == l.generator => s.exponent += e,
                _ => syllables.push(Syllable {
                    generator: l.generator,
                    exponent: e,
                }),
            }
        }
        Word { syllables }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.syllables.iter().flat_map(|s| {
            let l = Letter {
                generator: s.generator,
                inverted: s.exponent < 0,
            };
            std::iter::repeat_n(l, s.exponent.unsigned_abs() as usize)
        })
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.syllables
            .iter()
            .map(|s| s.exponent.unsigned_abs() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.iter().all(|s| s.exponent == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_generator(&self) -> u32 {
        self.syllables
            .iter()
            .map(|s| s.generator as u32)
            .max()
            .unwrap_or(0)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_word_at(text, 0)
    }
}

impl Ord for Word {
    /// Shortlex order on letters, with `a < A < b < B < ...`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters().cmp(other.letters()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("e");
        }
        for l in self.letters() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

fn parse_word_at(text: &str, offset: usize) -> Result<Word> {
    if text == "e" {
        return Ok(Word::identity());
    }
    if text.is_empty() {
        return Err(Error::Parse {
            position: offset,
            message: "empty word (write `e` for the identity)".into(),
        });
    }
    let mut letters = Vec::with_capacity(text.len());
    for (i, c) in text.char_indices() {
        if c == 'e' || c == 'E' {
            return Err(Error::Parse {
                position: offset + i,
                message: "`e` denotes the identity and cannot appear inside a word".into(),
            });
        }
        match Letter::from_char(c) {
            Some(l) => letters.push(l),
            None => {
                return Err(Error::Parse {
                    position: offset + i,
                    message: format!("unexpected character {c:?}"),
                })
            }
        }
    }
    Ok(Word::from_letters(letters))
}

/// Parses a comma separated list of words; positions in errors refer to the
/// whole input.
pub fn parse_word_list(text: &str) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in text.split(',') {
        let trimmed = part.trim();
        let lead = part.len() - part.trim_start().len();
        out.push(parse_word_at(trimmed, offset + lead)?);
        offset += part.len() + 1;
    }
    Ok(out)
}

/// A finitely generated group with a closed-form normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupPresentation {
    /// Free group of the given rank.
    Free { rank: u32 },
    /// Free product of cyclic groups; order 0 means an infinite cyclic factor.
    FreeProductCyclic { orders: Vec<u32> },
    /// Free abelian group `Z^rank`.
    FreeAbelian { rank: u32 },
}

impl GroupPresentation {
    pub fn free(rank: u32) -> Self {
        GroupPresentation::Free { rank }
    }

    pub fn free_abelian(rank: u32) -> Self {
        GroupPresentation::FreeAbelian { rank }
    }

    pub fn free_product_cyclic(orders: Vec<u32>) -> Self {
        GroupPresentation::FreeProductCyclic { orders }
    }

    /// Parses `free:R`, `fpc:M1,M2,...` or `zd:D`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, args) = text.split_once(':').ok_or_else(|| Error::Parse {
            position: 0,
            message: "expected `free:R`, `fpc:M1,M2,...` or `zd:D`".into(),
        })?;
        let base = kind.len() + 1;
        let number = |s: &str, pos: usize| -> Result<u32> {
            s.trim().parse::<u32>().map_err(|_| Error::Parse {
                position: pos,
                message: format!("expected a nonnegative integer, found {s:?}"),
            })
        };
        let p = match kind {
            "free" => GroupPresentation::Free {
                rank: number(args, base)?,
            },
            "zd" => GroupPresentation::FreeAbelian {
                rank: number(args, base)?,
            },
            "fpc" => {
                let mut orders = Vec::new();
                let mut pos = base;
                for part in args.split(',') {
                    orders.push(number(part, pos)?);
                    pos += part.len() + 1;
                }
                GroupPresentation::FreeProductCyclic { orders }
            }
            _ => {
                return Err(Error::Parse {
                    position: 0,
                    message: format!("unknown group family {kind:?}"),
                })
            }
        };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let rank = self.rank();
        if rank == 0 || rank > MAX_GENERATORS {
            return Err(Error::InvalidArgument(format!(
                "{self}: number of generators must be in 1..={MAX_GENERATORS}"
            )));
        }
        if let GroupPresentation::FreeProductCyclic { orders } = self {
            if let Some(m) = orders.iter().find(|&&m| m == 1) {
                return Err(Error::InvalidArgument(format!(
                    "{self}: factor order {m} (use 0 for Z, or an order >= 2)"
                )));
            }
        }
        Ok(())
    }

    /// Number of generators.
    pub fn rank(&self) -> u32 {
        match self {
            GroupPresentation::Free { rank } | GroupPresentation::FreeAbelian { rank } => *rank,
            GroupPresentation::FreeProductCyclic { orders } => orders.len() as u32,
        }
    }

    /// Order of generator `g` (1-based); 0 means infinite.
    pub fn order(&self, g: u32) -> u32 {
        match self {
            GroupPresentation::FreeProductCyclic { orders } => orders[g as usize - 1],
            _ => 0,
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, GroupPresentation::Free { .. })
    }

    pub fn validate(&self, w: &Word) -> Result<()> {
        let rank = self.rank();
        match w.syllables.iter().find(|s| s.generator as u32 > rank) {
            Some(s) => Err(Error::InvalidGenerator {
                index: s.generator as u32,
                rank,
                presentation: self.to_string(),
            }),
            None => Ok(()),
        }
    }

    fn reduce_exponent(&self, g: u8, e: i32) -> i32 {
        match self.order(g as u32) {
            0 => e,
            m => symmetric_residue(e, m as i32),
        }
    }

    fn push_syllable(&self, stack: &mut SmallVec<[Syllable; 6]>, s: Syllable) {
        let e = self.reduce_exponent(s.generator, s.exponent);
        if e == 0 {
            return;
        }
        if let Some(top) = stack.last_mut() {
            if top.generator == s.generator {
                let sum = self.reduce_exponent(s.generator, top.exponent + e);
                if sum == 0 {
                    stack.pop();
                } else {
                    top.exponent = sum;
                }
                return;
            }
        }
        stack.push(Syllable {
            generator: s.generator,
            exponent: e,
        });
    }

    fn abelian_form(&self, parts: impl Iterator<Item = Syllable>) -> Word {
        let mut exps = vec![0i64; self.rank() as usize + 1];
        for s in parts {
            exps[s.generator as usize] += s.exponent as i64;
        }
        Word::from_syllables(
            exps.iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(g, &e)| Syllable {
                    generator: g as u8,
                    exponent: e as i32,
                }),
        )
    }

    /// Canonical representative of `w`.
    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        self.validate(w)?;
        Ok(self.normal_form_unchecked(w))
    }

    fn normal_form_unchecked(&self, w: &Word) -> Word {
        match self {
            GroupPresentation::FreeAbelian { .. } => self.abelian_form(w.syllables.iter().copied()),
            _ => {
                let mut stack = SmallVec::new();
                for &s in &w.syllables {
                    self.push_syllable(&mut stack, s);
                }
                Word { syllables: stack }
            }
        }
    }

    /// Product of two normal-form words.
    pub fn multiply(&self, left: &Word, right: &Word) -> Word {
        match self {
            GroupPresentation::FreeAbelian { .. } => {
                let mut out: SmallVec<[Syllable; 6]> = SmallVec::new();
                let (mut i, mut j) = (0, 0);
                let (a, b) = (&left.syllables, &right.syllables);
                while i < a.len() || j < b.len() {
                    let next = match (a.get(i), b.get(j)) {
                        (Some(x), Some(y)) if x.generator == y.generator => {
                            i += 1;
                            j += 1;
                            Syllable {
                                generator: x.generator,
                                exponent: x.exponent + y.exponent,
                            }
                        }
                        (Some(x), Some(y)) if x.generator < y.generator => {
                            i += 1;
                            *x
                        }
                        (Some(x), None) => {
                            i += 1;
                            *x
                        }
                        (_, Some(y)) => {
                            j += 1;
                            *y
                        }
                        (None, None) => unreachable!(),
                    };
                    if next.exponent != 0 {
                        out.push(next);
                    }
                }
                Word { syllables: out }
            }
            _ => {
                let mut stack = left.syllables.clone();
                for &s in &right.syllables {
                    self.push_syllable(&mut stack, s);
                }
                Word { syllables: stack }
            }
        }
    }

    /// Inverse of a normal-form word.
    pub fn invert(&self, w: &Word) -> Word {
        match self {
            GroupPresentation::FreeAbelian { .. } => {
                Word::from_syllables(w.syllables.iter().map(|s| Syllable {
                    generator: s.generator,
                    exponent: -s.exponent,
                }))
            }
            _ => Word::from_syllables(w.syllables.iter().rev().map(|s| Syllable {
                generator: s.generator,
                exponent: self.reduce_exponent(s.generator, -s.exponent),
            })),
        }
    }

    /// Every generator and inverse as a normal-form word, deduplicated.
    pub fn generator_words(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for g in 1..=self.rank() {
            for inv in [false, true] {
                let w = self.normal_form_unchecked(&Word::letter(Letter::new(g, inv)));
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        out.sort();
        out
    }

    /// The natural symmetric generating set: all generators and inverses.
    pub fn standard_set(&self) -> GenSet {
        GenSet {
            presentation: self.clone(),
            words: self.generator_words(),
        }
    }

    /// Exact number of elements of word length at most `radius`, saturating.
    pub fn ball_size(&self, radius: u32) -> u128 {
        match self {
            GroupPresentation::Free { rank } => {
                let mut total: u128 = 1;
                let mut sphere: u128 = 2 * *rank as u128;
                for _ in 0..radius {
                    total = total.saturating_add(sphere);
                    sphere = sphere.saturating_mul(2 * *rank as u128 - 1);
                }
                total
            }
            GroupPresentation::FreeAbelian { rank } => {
                // points of Z^d with l1 norm <= R: sum_k 2^k C(d,k) C(R,k)
                let d = *rank as u128;
                let r = radius as u128;
                let mut total: u128 = 0;
                let (mut cd, mut cr, mut pow) = (1u128, 1u128, 1u128);
                for k in 0..=d.min(r) {
                    total = total.saturating_add(pow.saturating_mul(cd).saturating_mul(cr));
                    cd = cd.saturating_mul(d - k) / (k + 1);
                    cr = cr.saturating_mul(r - k) / (k + 1);
                    pow = pow.saturating_mul(2);
                }
                total
            }
            GroupPresentation::FreeProductCyclic { orders } => fpc_sphere_sizes(orders, radius)
                .into_iter()
                .fold(0u128, |a, b| a.saturating_add(b)),
        }
    }

    /// All elements of word length at most `radius`, in shortlex order.
    pub fn ball(&self, radius: u32, guard: usize) -> Result<Vec<Word>> {
        let predicted = self.ball_size(radius);
        if predicted > guard as u128 {
            return Err(Error::BallGuard {
                radius,
                predicted,
                guard,
            });
        }
        let gens = self.generator_words();
        let mut seen: FxHashSet<Word> = FxHashSet::default();
        seen.insert(Word::identity());
        let mut frontier = vec![Word::identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for g in &gens {
                    let v = self.multiply(w, g);
                    if seen.insert(v.clone()) {
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<Word> = seen.into_iter().collect();
        out.sort();
        Ok(out)
    }
}

fn symmetric_residue(e: i32, m: i32) -> i32 {
    let r = e.rem_euclid(m);
    if 2 * r > m {
        r - m
    } else {
        r
    }
}

/// Sphere sizes 0..=radius for a free product of cyclic groups, saturating.
fn fpc_sphere_sizes(orders: &[u32], radius: u32) -> Vec<u128> {
    let r = radius as usize;
    // syllable-length choices per factor
    let choices = |m: u32, len: usize| -> u128 {
        match m {
            0 => 2,
            m => {
                let m = m as usize;
                if 2 * len < m {
                    2
                } else if 2 * len == m {
                    1
                } else {
                    0
                }
            }
        }
    };
    // ending[l][i]: normal forms of length l whose last syllable is factor i
    let s = orders.len();
    let mut ending = vec![vec![0u128; s]; r + 1];
    let mut sizes = vec![0u128; r + 1];
    sizes[0] = 1;
    for l in 1..=r {
        for (i, &m) in orders.iter().enumerate() {
            let mut c: u128 = 0;
            for len in 1..=l {
                let ch = choices(m, len);
                if ch == 0 {
                    break;
                }
                let before: u128 = if len == l {
                    1
                } else {
                    (0..s)
                        .filter(|&j| j != i)
                        .fold(0u128, |a, j| a.saturating_add(ending[l - len][j]))
                };
                c = c.saturating_add(ch.saturating_mul(before));
            }
            ending[l][i] = c;
        }
        sizes[l] = ending[l].iter().fold(0u128, |a, &b| a.saturating_add(b));
    }
    sizes
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupPresentation::Free { rank } => write!(f, "free:{rank}"),
            GroupPresentation::FreeAbelian { rank } => write!(f, "zd:{rank}"),
            GroupPresentation::FreeProductCyclic { orders } => {
                let parts: Vec<String> = orders.iter().map(|m| m.to_string()).collect();
                write!(f, "fpc:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for GroupPresentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GroupPresentation::parse(s)
    }
}

/// A finite symmetric subset of a group, stored in shortlex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSet {
    presentation: GroupPresentation,
    words: Vec<Word>,
}

impl GenSet {
    /// Union of `words` with their inverses.
    pub fn symmetrize(
        p: &GroupPresentation,
        words: impl IntoIterator<Item = Word>,
    ) -> Result<Self> {
        let mut set: FxHashSet<Word> = FxHashSet::default();
        for w in words {
            let w = p.normal_form(&w)?;
            set.insert(p.invert(&w));
            set.insert(w);
        }
        let mut words: Vec<Word> = set.into_iter().collect();
        words.sort();
        Ok(GenSet {
            presentation: p.clone(),
            words,
        })
    }

    /// Accepts `words` only if they already form a symmetric set.
    pub fn new_symmetric(
        p: &GroupPresentation,
        words: impl IntoIterator<Item = Word>,
    ) -> Result<Self> {
        let mut normal = Vec::new();
        for w in words {
            normal.push(p.normal_form(&w)?);
        }
        let set: FxHashSet<&Word> = normal.iter().collect();
        if let Some(w) = normal.iter().find(|w| !set.contains(&p.invert(w))) {
            return Err(Error::NotSymmetric {
                missing: p.invert(w).to_string(),
            });
        }
        let mut words: Vec<Word> = set.into_iter().cloned().collect();
        words.sort();
        Ok(GenSet {
            presentation: p.clone(),
            words,
        })
    }

    /// Parses a comma separated symmetric set such as `a,A,b,B`.
    pub fn parse(p: &GroupPresentation, text: &str) -> Result<Self> {
        GenSet::new_symmetric(p, parse_word_list(text)?)
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.words.binary_search(w).is_ok()
    }

    pub fn is_symmetric(&self) -> bool {
        self.words
            .iter()
            .all(|w| self.contains(&self.presentation.invert(w)))
    }

    pub fn is_standard(&self) -> bool {
        self.words == self.presentation.generator_words()
    }

    pub fn union(&self, other: &GenSet) -> Result<GenSet> {
        if self.presentation != other.presentation {
            return Err(Error::PresentationMismatch {
                left: self.presentation.to_string(),
                right: other.presentation.to_string(),
            });
        }
        let mut words: Vec<Word> = self.words.iter().chain(&other.words).cloned().collect();
        words.sort();
        words.dedup();
        Ok(GenSet {
            presentation: self.presentation.clone(),
            words,
        })
    }
}

impl fmt::Display for GenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.words.iter().map(|w| w.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn nf(p: &GroupPresentation, s: &str) -> Word {
        p.normal_form(&w(s)).unwrap()
    }

    #[test]
    fn normal_form_examples() {
        let f2 = GroupPresentation::free(2);
        assert_eq!(nf(&f2, "aAb").to_string(), "b");
        let z2 = GroupPresentation::free_abelian(2);
        assert_eq!(nf(&z2, "ba").to_string(), "ab");
        let pq = GroupPresentation::free_product_cyclic(vec![2, 3]);
        assert_eq!(nf(&pq, "aabbb").to_string(), "e");
    }

    #[test]
    fn multiply_examples() {
        let f2 = GroupPresentation::free(2);
        assert_eq!(f2.multiply(&w("ab"), &w("B")).to_string(), "a");
        assert_eq!(f2.multiply(&w("a"), &w("A")).to_string(), "e");
        let pq = GroupPresentation::free_product_cyclic(vec![2, 3]);
        let bb = nf(&pq, "bb");
        assert_eq!(pq.multiply(&w("ab"), &bb).to_string(), "a");
    }

    #[test]
    fn invert_examples() {
        let f2 = GroupPresentation::free(2);
        assert_eq!(f2.invert(&w("ab")).to_string(), "BA");
        assert_eq!(f2.invert(&Word::identity()).to_string(), "e");
        let pq = GroupPresentation::free_product_cyclic(vec![2, 3]);
        // b^-1 = b^2 in Z/3; the symmetric residue writes it as B
        assert_eq!(pq.invert(&w("b")), nf(&pq, "bb"));
        assert_eq!(pq.invert(&w("b")).to_string(), "B");
    }

    #[test]
    fn symmetric_residue_ties_to_positive() {
        let z4 = GroupPresentation::free_product_cyclic(vec![4, 0]);
        assert_eq!(nf(&z4, "AA").to_string(), "aa");
        assert_eq!(nf(&z4, "aaa").to_string(), "A");
        assert_eq!(z4.invert(&w("aa")).to_string(), "aa");
        let z2 = GroupPresentation::free_product_cyclic(vec![2, 2]);
        assert_eq!(nf(&z2, "A").to_string(), "a");
    }

    #[test]
    fn symmetrize_examples() {
        let f2 = GroupPresentation::free(2);
        let s = GenSet::symmetrize(&f2, [w("a"), w("b")]).unwrap();
        assert_eq!(s.to_string(), "a,A,b,B");
        let s = GenSet::symmetrize(&f2, [w("a"), w("A")]).unwrap();
        assert_eq!(s.to_string(), "a,A");
        let pq = GroupPresentation::free_product_cyclic(vec![2, 3]);
        let s = GenSet::symmetrize(&pq, [w("a"), w("b")]).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.contains(&nf(&pq, "bb")));
    }

    #[test]
    fn parse_errors() {
        let f2 = GroupPresentation::free(2);
        let err = GenSet::parse(&f2, "a,b").unwrap_err();
        assert_eq!(err.to_string(), "set not symmetric: missing A");
        assert!(matches!(
            f2.normal_form(&w("c")),
            Err(Error::InvalidGenerator { index: 3, .. })
        ));
        match parse_word_list("a, A,x1") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        assert!(Word::parse("aeb").is_err());
        assert!(GroupPresentation::parse("fpc:2,1").is_err());
        assert!(GroupPresentation::parse("free:0").is_err());
        assert!(GroupPresentation::parse("heisenberg:3").is_err());
    }

    #[test]
    fn presentation_round_trip() {
        for s in ["free:2", "fpc:2,3", "fpc:0,4", "zd:3"] {
            assert_eq!(GroupPresentation::parse(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn ball_sizes_match_enumeration() {
        for p in [
            GroupPresentation::free(2),
            GroupPresentation::free(3),
            GroupPresentation::free_abelian(2),
            GroupPresentation::free_abelian(3),
            GroupPresentation::free_product_cyclic(vec![2, 3]),
            GroupPresentation::free_product_cyclic(vec![4, 0, 5]),
        ] {
            for r in 0..=5 {
                let ball = p.ball(r, 1_000_000).unwrap();
                assert_eq!(ball.len() as u128, p.ball_size(r), "{p} radius {r}");
                assert!(ball.iter().all(|w| w.len() <= r as usize));
            }
        }
        assert_eq!(GroupPresentation::free(2).ball_size(12), 1_062_881);
        assert!(matches!(
            GroupPresentation::free(2).ball(20, 1000),
            Err(Error::BallGuard { .. })
        ));
    }
}
