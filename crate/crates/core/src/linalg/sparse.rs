use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::scalar::Scalar;

type Row = BTreeMap<usize, Scalar>;

/// Incrementally maintained reduced row echelon form of sparse rows.
///
/// Each stored row has an implicit 1 in its pivot column and entries only in
/// non-pivot columns. The pivot of a new row is its largest column holding a
/// provably nonzero entry, so interval rows give a certified rank lower bound.
#[derive(Clone, Debug, Default)]
pub struct SparseEchelon {
    cols: usize,
    rows: BTreeMap<usize, Row>,
    occurs: HashMap<usize, BTreeSet<usize>>,
}

impl SparseEchelon {
    pub fn new(cols: usize) -> Self {
        SparseEchelon { cols, rows: BTreeMap::new(), occurs: HashMap::new() }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// Pivot row for column `p` (without its implicit leading 1).
    pub fn pivot_row(&self, p: usize) -> Option<&Row> {
        self.rows.get(&p)
    }

    /// Remainder of `row` after eliminating every pivot column.
    pub fn reduce<'a, I>(&self, row: I) -> Row
    where
        I: IntoIterator<Item = (usize, &'a Scalar)>,
    {
        let mut acc = Row::new();
        for (c, v) in row {
            if v.is_zero() {
                continue;
            }
            match self.rows.get(&c) {
                Some(pr) => {
                    for (cc, pv) in pr {
                        let t = v * pv;
                        sub_entry(&mut acc, *cc, &t);
                    }
                }
                None => add_entry(&mut acc, c, v),
            }
        }
        acc.retain(|_, v| !v.is_zero());
        acc
    }

    /// Adds a row; returns its pivot column if it was independent.
    pub fn insert(&mut self, row: Vec<(usize, Scalar)>) -> Option<usize> {
        let mut r = self.reduce(row.iter().map(|(c, v)| (*c, v)));
        let p = *r.iter().rev().find(|(_, v)| v.is_certainly_nonzero())?.0;
        let lead = r.remove(&p).unwrap();
        let inv = lead.inv().expect("certified nonzero pivot");
        for v in r.values_mut() {
            *v = &*v * &inv;
        }
        if let Some(users) = self.occurs.remove(&p) {
            for q in users {
                let pr = self.rows.get_mut(&q).unwrap();
                let g = pr.remove(&p).unwrap();
                for (cc, v) in &r {
                    let t = &g * v;
                    sub_entry(pr, *cc, &t);
                }
                let mut gone = Vec::new();
                pr.retain(|c, v| {
                    let keep = !v.is_zero();
                    if !keep {
                        gone.push(*c);
                    }
                    keep
                });
                for (cc, _) in &r {
                    if pr.contains_key(cc) {
                        self.occurs.entry(*cc).or_default().insert(q);
                    }
                }
                for c in gone {
                    if let Some(s) = self.occurs.get_mut(&c) {
                        s.remove(&q);
                    }
                }
            }
        }
        for c in r.keys() {
            self.occurs.entry(*c).or_default().insert(p);
        }
        self.rows.insert(p, r);
        Some(p)
    }

    /// Nullspace basis of the row space, one vector per free column in
    /// increasing order, with a 1 at that column and 0 at the other free columns.
    pub fn nullspace(&self) -> Vec<Row> {
        let mut out = Vec::new();
        for f in 0..self.cols {
            if self.rows.contains_key(&f) {
                continue;
            }
            let mut v = Row::new();
            v.insert(f, Scalar::one());
            if let Some(users) = self.occurs.get(&f) {
                for q in users {
                    v.insert(*q, -&self.rows[q][&f]);
                }
            }
            out.push(v);
        }
        out
    }
}

fn add_entry(r: &mut Row, c: usize, v: &Scalar) {
    match r.get_mut(&c) {
        Some(x) => *x += v,
        None => {
            r.insert(c, v.clone());
        }
    }
}

fn sub_entry(r: &mut Row, c: usize, v: &Scalar) {
    match r.get_mut(&c) {
        Some(x) => *x -= v,
        None => {
            r.insert(c, -v);
        }
    }
}
