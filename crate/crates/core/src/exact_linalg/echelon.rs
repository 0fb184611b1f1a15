//! Fraction-free sparse row echelon form.
//!
//! Columns are visited in a fixed elimination order (sparsest columns first,
//! ties by index) and rows are fed sparsest first, ties by index. Every stored
//! row is a primitive integer vector whose leading entry is positive, so
//! coefficient growth stays bounded by the content of a single row.

use super::int::Z;
use super::{Rational, SparseMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

type IRow = Vec<(usize, Z)>;

#[derive(Clone, Debug)]
pub struct Echelon {
    cols: usize,
    /// position -> original column
    order: Vec<usize>,
    /// original column -> position
    pos: Vec<usize>,
    /// stored rows, entries keyed by position and sorted
    rows: Vec<IRow>,
    /// position -> index into `rows`
    pivot_at: Vec<Option<usize>>,
    reduced: bool,
}

fn to_int_row(row: impl IntoIterator<Item = (usize, Rational)>) -> IRow {
    let row: Vec<(usize, Rational)> = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    let mut l = BigInt::one();
    for (_, v) in &row {
        l = l.lcm(v.denom());
    }
    row.into_iter().map(|(j, v)| (j, Z::from_big(&(v.numer() * (&l / v.denom()))))).collect()
}

fn make_primitive(row: &mut IRow) {
    if row.is_empty() {
        return;
    }
    let mut g = Z::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    if row[0].1.is_negative() {
        g = g.neg();
    }
    if !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v = v.div_exact(&g);
        }
    }
}

/// `row <- b*row - a*piv`, where `a` is row's entry at the pivot position and
/// `b` the pivot entry, both divided by their gcd.
fn eliminate(row: &IRow, piv: &IRow, a: &Z, b: &Z) -> IRow {
    let g = a.gcd(b);
    let (a, b) = (a.div_exact(&g), b.div_exact(&g));
    let mut out = Vec::with_capacity(row.len() + piv.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < piv.len() {
        let take_row = j >= piv.len() || (i < row.len() && row[i].0 < piv[j].0);
        let take_piv = i >= row.len() || (j < piv.len() && piv[j].0 < row[i].0);
        if take_row {
            out.push((row[i].0, row[i].1.mul(&b)));
            i += 1;
        } else if take_piv {
            out.push((piv[j].0, piv[j].1.mul(&a).neg()));
            j += 1;
        } else {
            let v = row[i].1.mul(&b).sub(&piv[j].1.mul(&a));
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    make_primitive(&mut out);
    out
}

impl Echelon {
    /// Empty echelon form with columns visited in index order.
    pub fn new(cols: usize) -> Self {
        Self::with_order((0..cols).collect())
    }

    fn with_order(order: Vec<usize>) -> Self {
        let cols = order.len();
        let mut pos = vec![0; cols];
        for (p, &c) in order.iter().enumerate() {
            pos[c] = p;
        }
        Echelon { cols, order, pos, rows: Vec::new(), pivot_at: vec![None; cols], reduced: true }
    }

    /// Echelon form of the row space of `m` (Markowitz-style ordering).
    pub fn of_matrix(m: &SparseMatrix) -> Self {
        let mut count = vec![0usize; m.cols()];
        for (_, j, _) in m.entries() {
            count[j] += 1;
        }
        let mut order: Vec<usize> = (0..m.cols()).collect();
        order.sort_by_key(|&j| (count[j], j));
        let mut e = Self::with_order(order);
        let mut rows: Vec<usize> = (0..m.rows()).collect();
        rows.sort_by_key(|&i| (m.row(i).len(), i));
        for i in rows {
            e.insert(m.row(i).iter().map(|(j, v)| (*j, v.clone())));
        }
        e
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row (entries keyed by original column). Returns whether it was
    /// independent of the rows already present.
    pub fn insert(&mut self, row: impl IntoIterator<Item = (usize, Rational)>) -> bool {
        let mut r: IRow = to_int_row(row).into_iter().map(|(j, v)| (self.pos[j], v)).collect();
        r.sort_by_key(|e| e.0);
        make_primitive(&mut r);
        while let Some((lead, a)) = r.first().cloned() {
            match self.pivot_at[lead] {
                Some(k) => {
                    let piv = &self.rows[k];
                    r = eliminate(&r, piv, &a, &piv[0].1);
                }
                None => {
                    self.pivot_at[lead] = Some(self.rows.len());
                    self.rows.push(r);
                    self.reduced = false;
                    return true;
                }
            }
        }
        false
    }

    /// Brings the stored rows to reduced row echelon form (no stored row
    /// touches another row's pivot column).
    pub fn reduce(&mut self) {
        if self.reduced {
            return;
        }
        let mut by_lead: Vec<usize> = (0..self.rows.len()).collect();
        by_lead.sort_by_key(|&k| std::cmp::Reverse(self.rows[k][0].0));
        for k in by_lead {
            loop {
                let hit = self.rows[k]
                    .iter()
                    .skip(1)
                    .find(|(p, _)| self.pivot_at[*p].is_some())
                    .cloned();
                let Some((p, a)) = hit else { break };
                let piv_idx = self.pivot_at[p].unwrap();
                let piv = &self.rows[piv_idx];
                let b = piv[0].1.clone();
                let new = eliminate_at(&self.rows[k], piv, &a, &b);
                self.rows[k] = new;
            }
        }
        self.reduced = true;
    }

    /// Original columns that carry a pivot, ascending.
    pub fn pivot_cols(&self) -> Vec<usize> {
        let mut v: Vec<usize> =
            (0..self.cols).filter(|&p| self.pivot_at[p].is_some()).map(|p| self.order[p]).collect();
        v.sort_unstable();
        v
    }

    /// Original columns without a pivot, ascending.
    pub fn free_cols(&self) -> Vec<usize> {
        let mut v: Vec<usize> =
            (0..self.cols).filter(|&p| self.pivot_at[p].is_none()).map(|p| self.order[p]).collect();
        v.sort_unstable();
        v
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_at[self.pos[col]].is_some()
    }

    /// Rows of the reduced form, normalized so the pivot entry is 1.
    /// Returns (pivot column, row entries keyed by original column).
    pub fn rref_rows(&mut self) -> Vec<(usize, BTreeMap<usize, Rational>)> {
        self.reduce();
        let mut out: Vec<(usize, BTreeMap<usize, Rational>)> = self
            .rows
            .iter()
            .map(|r| {
                let lead = r[0].1.to_big();
                let m = r.iter().map(|(p, v)| (self.order[*p], Rational::new(v.to_big(), lead.clone()))).collect();
                (self.order[r[0].0], m)
            })
            .collect();
        out.sort_by_key(|x| x.0);
        out
    }

    /// Reduces `v` modulo the row space; the result is supported on free
    /// columns only. Requires reduced form.
    pub fn project(&self, v: &BTreeMap<usize, Rational>) -> BTreeMap<usize, Rational> {
        assert!(self.reduced, "project requires a reduced echelon form");
        let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut hits: Vec<(usize, Rational)> = Vec::new();
        for (j, c) in v {
            if c.is_zero() {
                continue;
            }
            if let Some(k) = self.pivot_at[self.pos[*j]] {
                hits.push((k, c.clone()));
            } else {
                *out.entry(*j).or_insert_with(Rational::zero) += c;
            }
        }
        for (k, c) in hits {
            let r = &self.rows[k];
            let lead = r[0].1.to_big();
            for (p, e) in r.iter().skip(1) {
                let coef = &c * Rational::new(e.to_big(), lead.clone());
                *out.entry(self.order[*p]).or_insert_with(Rational::zero) -= coef;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Basis of {x : row·x = 0 for all stored rows}, one vector per free column.
    pub fn null_space(&mut self) -> Vec<Vec<Rational>> {
        self.reduce();
        let free = self.free_cols();
        let rref = self.rref_rows();
        free.iter()
            .map(|&f| {
                let mut x = vec![Rational::zero(); self.cols];
                x[f] = Rational::one();
                for (p, row) in &rref {
                    if let Some(c) = row.get(&f) {
                        x[*p] = -c.clone();
                    }
                }
                x
            })
            .collect()
    }
}

/// Like `eliminate`, but the pivot is not the row's leading entry.
fn eliminate_at(row: &IRow, piv: &IRow, a: &Z, b: &Z) -> IRow {
    let mut out = eliminate(row, piv, a, b);
    if !out.is_empty() && out[0].1.is_negative() {
        for (_, v) in out.iter_mut() {
            *v = v.neg();
        }
    }
    out
}
