use super::{canonical_form, HalfEdge, JacobiDiagram, JacobiError, LegPos, Support};
use std::collections::BTreeSet;

pub const MAX_DEGREE: usize = 5;

fn matchings(items: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if items.is_empty() {
        out.push(acc.clone());
        return;
    }
    let first = items[0];
    for k in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().copied().filter(|&x| x != items[k]).collect();
        acc.push((first, items[k]));
        matchings(&rest, acc, out);
        acc.pop();
    }
}

fn compositions(total: usize, parts: usize, min: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in min..=total {
        for mut rest in compositions(total - first, parts - 1, min) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn leg_layout(counts: &[usize]) -> Vec<LegPos> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(c, &k)| (0..k).map(move |r| LegPos { component: c, rank: r }))
        .collect()
}

fn insert_canonical(set: &mut BTreeSet<JacobiDiagram>, g: &JacobiDiagram) -> Result<(), JacobiError> {
    let c = canonical_form(g)?;
    if c.sign != 0 {
        set.insert(c.diagram);
    }
    Ok(())
}

/// Canonical chord diagrams of degree `n`, excluding those that vanish by AS
/// (chord diagrams never do).
pub fn enumerate_chord_diagrams(n: usize, support: &Support) -> Result<Vec<JacobiDiagram>, JacobiError> {
    if n > MAX_DEGREE {
        return Err(JacobiError::UnsupportedDegree(n, MAX_DEGREE));
    }
    let mut set = BTreeSet::new();
    for counts in compositions(2 * n, support.components.len(), 0) {
        let legs = leg_layout(&counts);
        let ids: Vec<usize> = (0..legs.len()).collect();
        let mut all = Vec::new();
        matchings(&ids, &mut Vec::new(), &mut all);
        for m in all {
            let edges = m.into_iter().map(|(a, b)| (HalfEdge::Leg(a), HalfEdge::Leg(b))).collect();
            insert_canonical(&mut set, &JacobiDiagram::new(support.clone(), legs.clone(), 0, edges)?)?;
        }
    }
    Ok(set.into_iter().collect())
}

/// Degree-`n` diagrams on a one-component support made of one trivalent vertex
/// joined to three legs and `n - 2` chords.
pub fn enumerate_one_vertex(n: usize, support: &Support) -> Result<Vec<JacobiDiagram>, JacobiError> {
    if n > MAX_DEGREE {
        return Err(JacobiError::UnsupportedDegree(n, MAX_DEGREE));
    }
    if n < 2 || support.components.len() != 1 {
        return Ok(Vec::new());
    }
    let u = 2 * n - 1;
    let legs = leg_layout(&[u]);
    let mut set = BTreeSet::new();
    for a in 0..u {
        for b in a + 1..u {
            for c in b + 1..u {
                let rest: Vec<usize> = (0..u).filter(|&x| x != a && x != b && x != c).collect();
                let mut all = Vec::new();
                matchings(&rest, &mut Vec::new(), &mut all);
                for m in all {
                    let mut edges: Vec<(HalfEdge, HalfEdge)> =
                        m.into_iter().map(|(x, y)| (HalfEdge::Leg(x), HalfEdge::Leg(y))).collect();
                    for (s, leg) in [a, b, c].into_iter().enumerate() {
                        edges.push((HalfEdge::Leg(leg), HalfEdge::Tri(0, s as u8)));
                    }
                    insert_canonical(&mut set, &JacobiDiagram::new(support.clone(), legs.clone(), 1, edges)?)?;
                }
            }
        }
    }
    Ok(set.into_iter().collect())
}

struct Gen<'a> {
    support: &'a Support,
    legs: Vec<LegPos>,
    u: usize,
    t: usize,
    mate: Vec<usize>,
    opened: usize,
    out: &'a mut BTreeSet<JacobiDiagram>,
}

const FREE: usize = usize::MAX;

impl Gen<'_> {
    fn vertex(&self, h: usize) -> Option<usize> {
        (h >= self.u).then(|| (h - self.u) / 3)
    }

    fn lowest_free_slot(&self, w: usize) -> Option<usize> {
        (0..3).map(|s| self.u + 3 * w + s).find(|&h| self.mate[h] == FREE)
    }

    fn link(&mut self, a: usize, b: usize) {
        self.mate[a] = b;
        self.mate[b] = a;
    }

    fn unlink(&mut self, a: usize, b: usize) {
        self.mate[a] = FREE;
        self.mate[b] = FREE;
    }

    fn run(&mut self) -> Result<(), JacobiError> {
        let Some(h) = self.mate.iter().position(|&m| m == FREE) else {
            return self.emit();
        };
        let hv = self.vertex(h);
        if let Some(v) = hv {
            if v >= self.opened {
                return Ok(());
            }
        }
        if hv.is_none() && self.t == 0 {
            if self.u == 2 && h == 0 {
                self.link(0, 1);
                self.run()?;
                self.unlink(0, 1);
            }
            return Ok(());
        }
        for w in 0..self.opened {
            if Some(w) == hv {
                continue;
            }
            if let Some(slot) = self.lowest_free_slot(w) {
                self.link(h, slot);
                self.run()?;
                self.unlink(h, slot);
            }
        }
        if self.opened < self.t {
            let slot = self.u + 3 * self.opened;
            self.opened += 1;
            self.link(h, slot);
            self.run()?;
            self.unlink(h, slot);
            self.opened -= 1;
        }
        Ok(())
    }

    fn half(&self, h: usize) -> HalfEdge {
        match self.vertex(h) {
            None => HalfEdge::Leg(h),
            Some(v) => HalfEdge::Tri(v, ((h - self.u) % 3) as u8),
        }
    }

    fn emit(&mut self) -> Result<(), JacobiError> {
        if self.opened != self.t {
            return Ok(());
        }
        let edges = (0..self.mate.len())
            .filter(|&h| h < self.mate[h])
            .map(|h| (self.half(h), self.half(self.mate[h])))
            .collect();
        let g = JacobiDiagram::new(self.support.clone(), self.legs.clone(), self.t, edges)?;
        if g.is_connected() {
            insert_canonical(self.out, &g)?;
        }
        Ok(())
    }
}

/// All connected diagrams of degree `n` on `support` with at least `min_legs`
/// legs on every component, in canonical form; diagrams that vanish by AS are
/// left out.
pub fn enumerate_connected(n: usize, support: &Support, min_legs: usize) -> Result<Vec<JacobiDiagram>, JacobiError> {
    if n > MAX_DEGREE {
        return Err(JacobiError::UnsupportedDegree(n, MAX_DEGREE));
    }
    let mut set = BTreeSet::new();
    for u in 1..=2 * n {
        let t = 2 * n - u;
        for counts in compositions(u, support.components.len(), min_legs) {
            let legs = leg_layout(&counts);
            let mut gen = Gen { support, legs, u, t, mate: vec![FREE; u + 3 * t], opened: 0, out: &mut set };
            gen.run()?;
        }
    }
    Ok(set.into_iter().collect())
}


#[cfg(test)]
mod tree_tests {
    use super::*;

    // degree of each trivalent vertex counting only edges to other trivalent vertices
    fn internal_degrees(g: &JacobiDiagram) -> Vec<usize> {
        let mut d = vec![0; g.n_tri];
        for &(a, b) in &g.edges {
            if let (HalfEdge::Tri(v, _), HalfEdge::Tri(w, _)) = (a, b) {
                d[v] += 1;
                d[w] += 1;
            }
        }
        d.sort_unstable();
        d
    }

    #[test]
    fn degree_five_with_three_legs_per_line_are_trees() {
        let d = enumerate_connected(5, &Support::two_lines(), 3).unwrap();
        assert!(!d.is_empty());
        let mut shapes = BTreeSet::new();
        for g in &d {
            assert_eq!((g.n_legs(), g.n_tri), (6, 4));
            let deg = internal_degrees(g);
            assert!(deg == vec![1, 1, 2, 2] || deg == vec![1, 1, 1, 3], "{g}");
            shapes.insert(deg);
        }
        assert_eq!(shapes.len(), 2);
    }
}
