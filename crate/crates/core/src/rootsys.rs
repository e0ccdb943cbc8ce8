//! Root-system data for the simple Lie types A–G.
//!
//! Node labels follow Bourbaki throughout the crate. Indices are 0-based in
//! the library API (node `i` here is Bourbaki node `i + 1`); [`WeylWord`]
//! parses and prints 1-based letters.
//!
//! The Cartan matrix convention is `a[i][j] = <alpha_j, coroot_i>`, so a
//! short simple root `i` bonded to a long root `j` has `a[i][j] = -m` with
//! `m` the bond multiplicity. Concretely, B2 is `[[2,-1],[-2,2]]` and G2 is
//! `[[2,-3],[-1,2]]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyalg::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootSystemError {
    #[error("invalid Cartan type {family}{rank}")]
    InvalidType { family: Family, rank: usize },
    #[error("unknown Lie family `{0}`")]
    UnknownFamily(String),
    #[error("simple root index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("word is not reduced: letter {position} (1-based) is a descent")]
    NotReduced { position: usize },
    #[error("cannot parse Weyl word `{0}`")]
    BadWord(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E => "E",
            Family::F => "F",
            Family::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = RootSystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            "D" | "d" => Ok(Family::D),
            "E" | "e" => Ok(Family::E),
            "F" | "f" => Ok(Family::F),
            "G" | "g" => Ok(Family::G),
            other => Err(RootSystemError::UnknownFamily(other.to_string())),
        }
    }
}

/// A simple Lie type such as `A2` or `E8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CartanType {
    family: Family,
    rank: usize,
}

impl CartanType {
    pub fn new(family: Family, rank: usize) -> Result<Self, RootSystemError> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if ok {
            Ok(Self { family, rank })
        } else {
            Err(RootSystemError::InvalidType { family, rank })
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_simply_laced(&self) -> bool {
        matches!(self.family, Family::A | Family::D | Family::E)
    }

    pub fn positive_root_count(&self) -> usize {
        let n = self.rank;
        match self.family {
            Family::A => n * (n + 1) / 2,
            Family::B | Family::C => n * n,
            Family::D => n * (n - 1),
            Family::E => match n {
                6 => 36,
                7 => 63,
                _ => 120,
            },
            Family::F => 24,
            Family::G => 6,
        }
    }

    /// Squared root lengths (shortest = 1) and Dynkin edges, Bourbaki order.
    fn diagram(&self) -> (Vec<i64>, Vec<(usize, usize)>) {
        let n = self.rank;
        let chain = |len: usize| (0..len.saturating_sub(1)).map(|k| (k, k + 1)).collect::<Vec<_>>();
        match self.family {
            Family::A => (vec![1; n], chain(n)),
            Family::B => {
                let mut lengths = vec![2; n];
                lengths[n - 1] = 1;
                (lengths, chain(n))
            }
            Family::C => {
                let mut lengths = vec![1; n];
                lengths[n - 1] = 2;
                (lengths, chain(n))
            }
            Family::D => {
                let mut edges = chain(n - 1);
                edges.push((n - 3, n - 1));
                (vec![1; n], edges)
            }
            Family::E => {
                let mut edges = vec![(0, 2), (1, 3)];
                edges.extend((2..n - 1).map(|k| (k, k + 1)));
                (vec![1; n], edges)
            }
            Family::F => (vec![2, 2, 1, 1], chain(4)),
            Family::G => (vec![1, 3], chain(2)),
        }
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

impl FromStr for CartanType {
    type Err = RootSystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut chars = s.chars();
        let fam = chars.next().ok_or_else(|| RootSystemError::UnknownFamily(s.into()))?;
        let family: Family = fam.to_string().parse()?;
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| RootSystemError::UnknownFamily(s.into()))?;
        CartanType::new(family, rank)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CartanMatrix {
    entries: Vec<Vec<i64>>,
}

impl CartanMatrix {
    /// Builds a matrix from raw entries, checking the generalized Cartan
    /// matrix axioms.
    pub fn from_entries(entries: Vec<Vec<i64>>) -> Option<Self> {
        let r = entries.len();
        if r == 0 || entries.iter().any(|row| row.len() != r) {
            return None;
        }
        for i in 0..r {
            if entries[i][i] != 2 {
                return None;
            }
            for j in 0..r {
                if i != j && (entries[i][j] > 0 || (entries[i][j] == 0) != (entries[j][i] == 0)) {
                    return None;
                }
            }
        }
        Some(Self { entries })
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    /// `a[i][j] = <alpha_j, coroot_i>`.
    #[inline]
    pub fn a(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    /// Off-diagonal neighbours of node `i` in the Dynkin diagram.
    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rank()).filter(move |&j| j != i && self.entries[i][j] != 0)
    }

    pub fn check_index(&self, i: usize) -> Result<(), RootSystemError> {
        if i < self.rank() {
            Ok(())
        } else {
            Err(RootSystemError::IndexOutOfRange { index: i, rank: self.rank() })
        }
    }

    /// Applies `s_i` to a root written in simple-root coordinates.
    pub fn reflect_root(&self, i: usize, root: &mut [i64]) {
        let pairing: i64 = (0..self.rank()).map(|j| root[j] * self.entries[i][j]).sum();
        root[i] -= pairing;
    }

    /// `w(alpha_i)` for `w = s_{letters[0]} ... s_{letters[k-1]}`.
    fn act_on_simple(&self, letters: &[usize], i: usize) -> Vec<i64> {
        let mut root = vec![0; self.rank()];
        root[i] = 1;
        for &l in letters.iter().rev() {
            self.reflect_root(l, &mut root);
        }
        root
    }

    fn is_positive(root: &[i64]) -> bool {
        root.iter().all(|&c| c >= 0) && root.iter().any(|&c| c > 0)
    }
}

/// The standard Cartan matrix of `ty` in Bourbaki labelling.
pub fn cartan_matrix(ty: CartanType) -> CartanMatrix {
    let r = ty.rank();
    let (lengths, edges) = ty.diagram();
    let mut entries = vec![vec![0i64; r]; r];
    for (i, row) in entries.iter_mut().enumerate() {
        row[i] = 2;
    }
    for (i, j) in edges {
        let long = lengths[i].max(lengths[j]);
        entries[i][j] = -long / lengths[i];
        entries[j][i] = -long / lengths[j];
    }
    CartanMatrix { entries }
}

/// A semisimple twist `Z^H = sum_i zeta_i coroot_i`, stored in the coroot basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Twist<S: Scalar> {
    pub zeta: Vec<S>,
}

impl<S: Scalar> Twist<S> {
    pub fn new(zeta: Vec<S>) -> Self {
        Self { zeta }
    }

    pub fn zero(ctx: &S::Ctx, rank: usize) -> Self {
        Self { zeta: vec![S::zero(ctx); rank] }
    }

    pub fn rank(&self) -> usize {
        self.zeta.len()
    }

    /// All pairings `xi_i = <alpha_i, Z^H>`.
    pub fn pairings(&self, c: &CartanMatrix) -> Vec<S> {
        (0..c.rank()).map(|i| pairing(i, self, c)).collect()
    }

    /// True when every simple root pairs nontrivially with the twist.
    pub fn all_pairings_nonzero(&self, c: &CartanMatrix) -> bool {
        self.pairings(c).iter().all(|x| !x.is_zero())
    }

    pub fn scaled(&self, t: &S) -> Self {
        Self { zeta: self.zeta.iter().map(|z| z.mul(t)).collect() }
    }
}

/// `xi_i = <alpha_i, Z^H> = sum_j a[j][i] zeta_j`.
pub fn pairing<S: Scalar>(i: usize, twist: &Twist<S>, c: &CartanMatrix) -> S {
    let mut acc = S::zero(&twist.zeta[0].ctx());
    for (j, z) in twist.zeta.iter().enumerate() {
        let a = c.a(j, i);
        if a != 0 {
            acc = acc.add(&z.mul_i64(a));
        }
    }
    acc
}

/// The simple reflection `s_i(Z^H) = Z^H - xi_i coroot_i`.
pub fn reflect_twist<S: Scalar>(i: usize, twist: &Twist<S>, c: &CartanMatrix) -> Twist<S> {
    let xi = pairing(i, twist, c);
    let mut zeta = twist.zeta.clone();
    zeta[i] = zeta[i].sub(&xi);
    Twist { zeta }
}

/// A word in the simple reflections; letters are 0-based node indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct WeylWord {
    pub letters: Vec<usize>,
}

impl WeylWord {
    pub fn new(letters: Vec<usize>) -> Self {
        Self { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Checks every letter is a valid node and that the word is reduced,
    /// by verifying `s_{i_1}...s_{i_{m-1}}(alpha_{i_m}) > 0` at each step.
    pub fn check_reduced(&self, c: &CartanMatrix) -> Result<(), RootSystemError> {
        for &l in &self.letters {
            c.check_index(l)?;
        }
        for m in 0..self.letters.len() {
            let root = c.act_on_simple(&self.letters[..m], self.letters[m]);
            if !CartanMatrix::is_positive(&root) {
                return Err(RootSystemError::NotReduced { position: m + 1 });
            }
        }
        Ok(())
    }

    /// `w(Z^H)` where `w` is the product of the letters read left to right.
    pub fn act_on_twist<S: Scalar>(&self, twist: &Twist<S>, c: &CartanMatrix) -> Twist<S> {
        self.letters
            .iter()
            .rev()
            .fold(twist.clone(), |z, &i| reflect_twist(i, &z, c))
    }

    /// 1-based letters, as used in files and on the command line.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l + 1).collect()
    }

    pub fn from_one_based(letters: &[usize]) -> Result<Self, RootSystemError> {
        letters
            .iter()
            .map(|&l| l.checked_sub(1).ok_or_else(|| RootSystemError::BadWord(l.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }
}

impl fmt::Display for WeylWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_one_based().iter().map(|l| l.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for WeylWord {
    type Err = RootSystemError;

    /// Accepts `1,2,1`, `(1,2,1)`, `1 2 1` or `121` (single-digit letters).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if inner.is_empty() {
            return Ok(Self::default());
        }
        let letters: Result<Vec<usize>, _> = if inner.contains(',') || inner.contains(' ') {
            inner
                .split(|ch: char| ch == ',' || ch.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>())
                .collect()
        } else {
            inner.chars().map(|ch| ch.to_string().parse::<usize>()).collect()
        };
        let letters = letters.map_err(|_| RootSystemError::BadWord(s.to_string()))?;
        Self::from_one_based(&letters)
    }
}

/// The lexicographically first reduced word for the longest element,
/// built greedily: append the smallest `i` with `w(alpha_i) > 0` until
/// none remains. For `A_n` this is the staircase `1,2,1,3,2,1,...`.
pub fn w0_reduced_word(ty: CartanType) -> WeylWord {
    let c = cartan_matrix(ty);
    let mut letters = Vec::with_capacity(ty.positive_root_count());
    loop {
        let next = (0..c.rank())
            .find(|&i| CartanMatrix::is_positive(&c.act_on_simple(&letters, i)));
        match next {
            Some(i) => letters.push(i),
            None => break,
        }
    }
    WeylWord { letters }
}
