use super::Rational;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Row-major sparse matrix over ℚ. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, Rational>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![BTreeMap::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n, n);
        for i in 0..n {
            m.set(i, i, Rational::from_integer(1.into()));
        }
        m
    }

    pub fn from_dense<T: Into<Rational> + Clone>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::new(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged dense matrix");
            for (j, v) in r.iter().enumerate() {
                m.set(i, j, v.clone().into());
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

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.data[i].get(&j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        if v.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Rational) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        if v.is_zero() {
            return;
        }
        let e = self.data[i].entry(j).or_insert_with(Rational::zero);
        *e += v;
        if e.is_zero() {
            self.data[i].remove(&j);
        }
    }

    pub fn row(&self, i: usize) -> &BTreeMap<usize, Rational> {
        &self.data[i]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &BTreeMap<usize, Rational>> {
        self.data.iter()
    }

    /// All stored entries in (row, col) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.data.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn push_row(&mut self, row: BTreeMap<usize, Rational>) {
        debug_assert!(row.keys().all(|&j| j < self.cols));
        let row = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        self.data.push(row);
        self.rows += 1;
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::new(self.cols, self.rows);
        for (i, j, v) in self.entries() {
            t.data[j].insert(i, v.clone());
        }
        t
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = SparseMatrix::new(self.rows, other.cols);
        for (i, r) in self.data.iter().enumerate() {
            for (k, a) in r {
                for (j, b) in &other.data[*k] {
                    out.add_to(i, *j, &(a * b));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        self.data
            .iter()
            .map(|r| r.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &v[*j]))
            .collect()
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> SparseMatrix {
        assert_eq!(perm.len(), self.rows);
        SparseMatrix { rows: self.rows, cols: self.cols, data: perm.iter().map(|&p| self.data[p].clone()).collect() }
    }

    /// Column `perm[j]` of `self` becomes column `j` of the result.
    pub fn permute_cols(&self, perm: &[usize]) -> SparseMatrix {
        assert_eq!(perm.len(), self.cols);
        let mut inv = vec![0; self.cols];
        for (j, &p) in perm.iter().enumerate() {
            inv[p] = j;
        }
        let mut out = SparseMatrix::new(self.rows, self.cols);
        for (i, j, v) in self.entries() {
            out.data[i].insert(inv[j], v.clone());
        }
        out
    }
}
