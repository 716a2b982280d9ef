//! Color and position symmetries of a candidate set.
//!
//! Grading is invariant under relabeling colors (fixing the joker) and under
//! permuting positions of question and secret together. A symmetry of the
//! current candidate set therefore maps winning questions to winning
//! questions, and only one question per orbit needs to be searched.

use crate::game::{Color, MAX_COLORS, MAX_PEGS};

pub(crate) const NO_POS: u8 = u8::MAX;

/// A position permutation paired with a color relabeling.
#[derive(Clone, Debug)]
pub(crate) struct Generator {
    pub positions: [u8; MAX_PEGS],
    pub colors: [Color; MAX_COLORS],
}

impl Generator {
    pub fn apply(&self, q: &[Color], out: &mut [Color]) {
        for (i, &k) in q.iter().enumerate() {
            out[self.positions[i] as usize] = self.colors[k as usize];
        }
    }
}

/// Symmetry information for one search node.
#[derive(Clone, Debug)]
pub(crate) struct NodeSymmetry {
    /// Class id of every question color. Colors in one class are
    /// interchangeable: every permutation of a class maps the candidate set
    /// onto itself.
    pub class_of: [u8; MAX_COLORS],
    /// Members of each class, ascending.
    pub classes: Vec<Vec<Color>>,
    /// Colors that occur in no candidate (the joker excluded).
    pub dead: u64,
    pub generators: Vec<Generator>,
}

impl NodeSymmetry {
    pub fn class_size(&self, k: Color) -> usize {
        self.classes[self.class_of[k as usize] as usize].len()
    }

    pub fn is_dead(&self, k: Color) -> bool {
        self.dead & (1 << k) != 0
    }

    pub fn dead_min(&self) -> Option<Color> {
        (self.dead != 0).then(|| self.dead.trailing_zeros() as Color)
    }
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// Position permutations tried as symmetry generators.
pub(crate) fn generator_positions(p: usize) -> Vec<Vec<usize>> {
    if p <= 5 {
        permutations(p).into_iter().skip(1).collect()
    } else {
        let mut out = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                let mut v: Vec<usize> = (0..p).collect();
                v.swap(i, j);
                out.push(v);
            }
        }
        out
    }
}

/// Per-color occurrence counts by position: `rows[k * p + i]`.
pub(crate) fn color_rows(codes: &[&[Color]], p: usize, width: usize) -> Vec<u32> {
    let mut rows = vec![0u32; width * p];
    for s in codes {
        for (i, &k) in s.iter().enumerate() {
            rows[k as usize * p + i] += 1;
        }
    }
    rows
}
