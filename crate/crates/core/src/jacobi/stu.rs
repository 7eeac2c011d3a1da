use super::{canonical_form, HalfEdge, JacobiDiagram, JacobiError, LegPos};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Formal rational combination of canonical diagrams.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagramSum {
    pub terms: BTreeMap<JacobiDiagram, BigRational>,
}

impl DiagramSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_diagram(g: &JacobiDiagram) -> Result<Self, JacobiError> {
        let mut s = Self::new();
        s.add_diagram(g, &BigRational::one())?;
        Ok(s)
    }

    /// Adds `coeff * g`, storing `g` by its canonical form.
    pub fn add_diagram(&mut self, g: &JacobiDiagram, coeff: &BigRational) -> Result<(), JacobiError> {
        let c = canonical_form(g)?;
        if c.sign == 0 || coeff.is_zero() {
            return Ok(());
        }
        let c_coeff = if c.sign > 0 { coeff.clone() } else { -coeff.clone() };
        self.add_canonical(c.diagram, c_coeff);
        Ok(())
    }

    fn add_canonical(&mut self, g: JacobiDiagram, coeff: BigRational) {
        let e = self.terms.entry(g).or_insert_with(BigRational::zero);
        *e += coeff;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&mut self, other: &DiagramSum) {
        for (g, c) in &other.terms {
            self.add_canonical(g.clone(), c.clone());
        }
    }

    pub fn scaled(&self, k: &BigRational) -> DiagramSum {
        let mut s = DiagramSum::new();
        for (g, c) in &self.terms {
            s.add_canonical(g.clone(), c * k);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, g: &JacobiDiagram) -> Result<BigRational, JacobiError> {
        let c = canonical_form(g)?;
        let v = self.terms.get(&c.diagram).cloned().unwrap_or_else(BigRational::zero);
        Ok(v * BigRational::from_integer(c.sign.into()))
    }
}

/// Which leg-adjacent trivalent vertex to resolve first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionOrder {
    First,
    Last,
}

/// The STU resolution of vertex `v` along the leg on its slot `slot`.
/// Returns `(T, U)` with `g = T - U`.
pub fn stu_at(g: &JacobiDiagram, v: usize, slot: u8) -> Result<(JacobiDiagram, JacobiDiagram), JacobiError> {
    let HalfEdge::Leg(stem) = g.partner(HalfEdge::Tri(v, slot)) else {
        return Err(JacobiError::InvalidDiagram(format!("slot {slot} of T{v} is not a leg")));
    };
    let right = g.partner(HalfEdge::Tri(v, (slot + 1) % 3));
    let left = g.partner(HalfEdge::Tri(v, (slot + 2) % 3));
    let pos = g.legs[stem];
    let shift_tri = |h: HalfEdge| match h {
        HalfEdge::Tri(w, s) if w > v => HalfEdge::Tri(w - 1, s),
        other => other,
    };
    let shift_leg = |h: HalfEdge| match h {
        HalfEdge::Leg(i) if i > stem => HalfEdge::Leg(i - 1),
        other => other,
    };
    let build = |first: HalfEdge, second: HalfEdge| -> Result<JacobiDiagram, JacobiError> {
        let mut legs: Vec<LegPos> = Vec::new();
        for (i, l) in g.legs.iter().enumerate() {
            if i != stem {
                legs.push(LegPos { component: l.component, rank: 3 * l.rank });
            }
        }
        let a = legs.len();
        legs.push(LegPos { component: pos.component, rank: 3 * pos.rank });
        legs.push(LegPos { component: pos.component, rank: 3 * pos.rank + 1 });
        let mut edges = Vec::new();
        for &(x, y) in &g.edges {
            let touches = |h: HalfEdge| matches!(h, HalfEdge::Tri(w, _) if w == v);
            if touches(x) || touches(y) {
                continue;
            }
            edges.push((shift_leg(shift_tri(x)), shift_leg(shift_tri(y))));
        }
        let fix = |h: HalfEdge| shift_leg(shift_tri(h));
        edges.push((HalfEdge::Leg(a), fix(first)));
        edges.push((HalfEdge::Leg(a + 1), fix(second)));
        JacobiDiagram::new(g.support.clone(), legs, g.n_tri - 1, edges)
    };
    // the earlier new leg attaches to the arm preceding the stem's cyclic successor
    let t = build(left, right)?;
    let u = build(right, left)?;
    Ok((t, u))
}

pub fn stu_reduce(g: &JacobiDiagram) -> Result<DiagramSum, JacobiError> {
    stu_reduce_with(g, ReductionOrder::First)
}

/// Rewrites a diagram as a combination of chord diagrams by repeated STU.
pub fn stu_reduce_with(g: &JacobiDiagram, order: ReductionOrder) -> Result<DiagramSum, JacobiError> {
    let mut pending = DiagramSum::from_diagram(g)?;
    let mut done = DiagramSum::new();
    while let Some((h, c)) = pending.terms.pop_first() {
        if h.is_chord_diagram() {
            done.add_canonical(h, c);
            continue;
        }
        let mut sites = Vec::new();
        for v in 0..h.n_tri {
            for s in 0..3u8 {
                if matches!(h.partner(HalfEdge::Tri(v, s)), HalfEdge::Leg(_)) {
                    sites.push((v, s));
                }
            }
        }
        let (v, s) = match order {
            ReductionOrder::First => sites[0],
            ReductionOrder::Last => *sites.last().expect("a leg-adjacent vertex exists"),
        };
        let (t, u) = stu_at(&h, v, s)?;
        pending.add_diagram(&t, &c)?;
        pending.add_diagram(&u, &(-c))?;
    }
    Ok(done)
}

#[cfg(test)]
mod tests {
    use super::super::Support;
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn y_reduces_to_parallel_minus_crossed() {
        let s = stu_reduce(&JacobiDiagram::y_diagram()).unwrap();
        let parallel = JacobiDiagram::chords(Support::circle(), &[(0, 3), (1, 2)]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.coefficient(&parallel).unwrap(), q(1));
        assert_eq!(s.coefficient(&JacobiDiagram::x_diagram()).unwrap(), q(-1));
    }

    #[test]
    fn reduction_order_agrees_for_y() {
        let a = stu_reduce_with(&JacobiDiagram::y_diagram(), ReductionOrder::First).unwrap();
        let b = stu_reduce_with(&JacobiDiagram::y_diagram(), ReductionOrder::Last).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sums_cancel() {
        let mut s = DiagramSum::from_diagram(&JacobiDiagram::y_diagram()).unwrap();
        s.add_diagram(&JacobiDiagram::y_diagram().flip_vertex(0), &q(1)).unwrap();
        assert!(s.is_zero());
    }
}
