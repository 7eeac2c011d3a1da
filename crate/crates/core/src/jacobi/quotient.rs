use super::enumerate::{enumerate_chord_diagrams, enumerate_one_vertex};
use super::stu::{stu_at, stu_reduce, DiagramSum};
use super::{HalfEdge, JacobiDiagram, JacobiError, Support};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use std::collections::{BTreeMap, HashMap};

type Row = BTreeMap<usize, BigRational>;

/// Chord diagrams of one degree modulo the 4T relations, kept as an exact
/// reduced row echelon form over the chord-diagram basis.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub degree: usize,
    pub support: Support,
    pub chord_diagrams: Vec<JacobiDiagram>,
    pub basis: Vec<JacobiDiagram>,
    index: HashMap<JacobiDiagram, usize>,
    pivots: BTreeMap<usize, Row>,
    basis_cols: Vec<usize>,
}

impl Quotient {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn relation_rank(&self) -> usize {
        self.pivots.len()
    }

    fn reduce(&self, mut v: Row) -> Row {
        for (p, row) in &self.pivots {
            if let Some(c) = v.get(p).cloned() {
                for (col, x) in row {
                    let e = v.entry(*col).or_insert_with(BigRational::zero);
                    *e -= &c * x;
                }
                v.retain(|_, x| !x.is_zero());
            }
        }
        v
    }

    fn to_row(&self, s: &DiagramSum) -> Result<Row, JacobiError> {
        let mut row = Row::new();
        for (g, c) in &s.terms {
            let chords = if g.is_chord_diagram() { DiagramSum::from_diagram(g)? } else { stu_reduce(g)? };
            for (h, d) in &chords.terms {
                let col = *self.index.get(h).ok_or_else(|| {
                    JacobiError::InvalidDiagram(format!("diagram of degree {} on another support", h.degree()))
                })?;
                *row.entry(col).or_insert_with(BigRational::zero) += c * d;
            }
        }
        row.retain(|_, x| !x.is_zero());
        Ok(row)
    }

    /// Coordinates of the image of `s` in the quotient basis.
    pub fn project(&self, s: &DiagramSum) -> Result<Vec<BigRational>, JacobiError> {
        let r = self.reduce(self.to_row(s)?);
        Ok(self.basis_cols.iter().map(|c| r.get(c).cloned().unwrap_or_else(BigRational::zero)).collect())
    }

    pub fn is_zero(&self, s: &DiagramSum) -> Result<bool, JacobiError> {
        Ok(self.project(s)?.iter().all(Zero::is_zero))
    }
}

fn relations(n: usize, support: &Support) -> Result<Vec<DiagramSum>, JacobiError> {
    let mut rels = Vec::new();
    for y in enumerate_one_vertex(n, support)? {
        let mut sums = Vec::new();
        for s in 0..3u8 {
            if !matches!(y.partner(HalfEdge::Tri(0, s)), HalfEdge::Leg(_)) {
                continue;
            }
            let (t, u) = stu_at(&y, 0, s)?;
            let mut sum = DiagramSum::from_diagram(&t)?;
            sum.add_diagram(&u, &-BigRational::one())?;
            sums.push(sum);
        }
        for w in sums.windows(2) {
            let mut r = w[0].clone();
            r.add(&w[1].scaled(&-BigRational::one()));
            if !r.is_zero() {
                rels.push(r);
            }
        }
    }
    Ok(rels)
}

fn build(n: usize, support: &Support, shuffle: Option<u64>) -> Result<Quotient, JacobiError> {
    let chord_diagrams = enumerate_chord_diagrams(n, support)?;
    let index: HashMap<JacobiDiagram, usize> = chord_diagrams.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
    let mut priority: Vec<usize> = (0..chord_diagrams.len()).collect();
    let mut rels = relations(n, support)?;
    if let Some(seed) = shuffle {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        priority.shuffle(&mut rng);
        rels.shuffle(&mut rng);
    }
    let mut q = Quotient {
        degree: n,
        support: support.clone(),
        chord_diagrams: chord_diagrams.clone(),
        basis: Vec::new(),
        index,
        pivots: BTreeMap::new(),
        basis_cols: Vec::new(),
    };
    for rel in &rels {
        let row = q.reduce(q.to_row(rel)?);
        let Some(&p) = row.keys().min_by_key(|&&c| priority[c]) else { continue };
        let inv = BigRational::one() / &row[&p];
        let row: Row = row.into_iter().map(|(c, x)| (c, x * &inv)).collect();
        for other in q.pivots.values_mut() {
            if let Some(c) = other.get(&p).cloned() {
                for (col, x) in &row {
                    let e = other.entry(*col).or_insert_with(BigRational::zero);
                    *e -= &c * x;
                }
                other.retain(|_, x| !x.is_zero());
            }
        }
        q.pivots.insert(p, row);
    }
    q.basis_cols = (0..chord_diagrams.len()).filter(|c| !q.pivots.contains_key(c)).collect();
    q.basis = q.basis_cols.iter().map(|&c| chord_diagrams[c].clone()).collect();
    Ok(q)
}

/// The degree-`n` quotient (n <= 4) with pivots chosen in diagram order.
pub fn quotient_basis(n: usize, support: &Support) -> Result<Quotient, JacobiError> {
    if n > 4 {
        return Err(JacobiError::UnsupportedDegree(n, 4));
    }
    build(n, support, None)
}

/// Same quotient, eliminating relations and choosing pivots in a seeded random order.
pub fn quotient_basis_shuffled(n: usize, support: &Support, seed: u64) -> Result<Quotient, JacobiError> {
    if n > 4 {
        return Err(JacobiError::UnsupportedDegree(n, 4));
    }
    build(n, support, Some(seed))
}
