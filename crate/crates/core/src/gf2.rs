//! Dense matrices over the two-element field.

use std::fmt;

/// Row-major bit matrix. Each row occupies `stride` 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        Gf2Matrix {
            rows,
            cols,
            stride,
            bits: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.stride + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.bits[r * self.stride + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_bools(&self, r: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Rank by Gaussian elimination: pivot on the first nonzero column, using
    /// the first remaining row that has a one there.
    pub fn rank(&self) -> usize {
        self.row_basis().len()
    }

    /// Greedy row basis: scanning rows top to bottom, keep each row that is
    /// independent of the rows kept so far. Returns the kept row indices in
    /// ascending order.
    pub fn row_basis(&self) -> Vec<usize> {
        let mut reducer = Reducer::new(self.stride);
        (0..self.rows).filter(|&r| reducer.insert(self.row(r))).collect()
    }
}

/// Incremental echelon basis used to test linear independence of bit rows.
#[derive(Clone, Debug)]
pub struct Reducer {
    stride: usize,
    // (pivot bit index, reduced row)
    basis: Vec<(usize, Vec<u64>)>,
}

impl Reducer {
    pub fn new(stride: usize) -> Self {
        Reducer {
            stride,
            basis: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    fn reduce(&self, row: &[u64]) -> Vec<u64> {
        debug_assert_eq!(row.len(), self.stride);
        let mut v = row.to_vec();
        for (pivot, b) in &self.basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x ^= y;
                }
            }
        }
        v
    }

    /// Whether `row` lies in the span of the rows inserted so far.
    pub fn in_span(&self, row: &[u64]) -> bool {
        self.reduce(row).iter().all(|&w| w == 0)
    }

    /// Adds `row` if it is independent; returns whether it was added.
    pub fn insert(&mut self, row: &[u64]) -> bool {
        let v = self.reduce(row);
        let Some(pivot) = first_set_bit(&v) else {
            return false;
        };
        // keep the basis fully reduced on pivot columns
        for (_, b) in self.basis.iter_mut() {
            if b[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in b.iter_mut().zip(&v) {
                    *x ^= y;
                }
            }
        }
        self.basis.push((pivot, v));
        true
    }
}

fn first_set_bit(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: a set of rows is dependent iff some nonempty subset
    /// XORs to zero. Rank is the size of the largest independent subset.
    fn brute_rank(rows: &[Vec<bool>]) -> usize {
        let m = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut best = 0;
        for mask in 0u32..(1 << m) {
            let chosen: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let independent = (1u32..(1 << chosen.len())).all(|sub| {
                (0..cols).any(|c| {
                    chosen
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| sub >> j & 1 == 1)
                        .fold(false, |acc, (_, &i)| acc ^ rows[i][c])
                })
            });
            if independent {
                best = best.max(chosen.len());
            }
        }
        best
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Gf2Matrix::identity(3).rank(), 3);
        assert_eq!(Gf2Matrix::from_rows(&vec![vec![true; 4]; 4]).rank(), 1);
        let c5 = Gf2Matrix::from_rows(&[vec![false, false, true], vec![true, false, false]]);
        assert_eq!(brute_rank(&[vec![false, false, true], vec![true, false, false]]), 2);
        assert_eq!(c5.rank(), 2);
        assert_eq!(Gf2Matrix::zeros(0, 5).rank(), 0);
    }

    #[test]
    fn wide_rows_cross_word_boundary() {
        let mut m = Gf2Matrix::zeros(3, 130);
        m.set(0, 129, true);
        m.set(1, 129, true);
        m.set(1, 3, true);
        m.set(2, 3, true);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.transpose().rank(), 2);
    }

    proptest! {
        #[test]
        fn rank_matches_subset_enumeration(rows in 0usize..=6, cols in 0usize..=6, seed in any::<u64>()) {
            let mut s = seed;
            let data: Vec<Vec<bool>> = (0..rows)
                .map(|_| (0..cols).map(|_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); s >> 63 == 1 }).collect())
                .collect();
            let m = if rows == 0 { Gf2Matrix::zeros(0, cols) } else { Gf2Matrix::from_rows(&data) };
            prop_assert_eq!(m.rank(), brute_rank(&data));
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }
    }
}
