//! Jacobi diagrams on oriented one-manifolds.
//!
//! A diagram is a uni-trivalent graph stored as a perfect matching of half-edges.
//! Legs carry a combinatorial position (component, rank); trivalent vertex `v` owns
//! the half-edges `Tri(v, 0..3)` and its orientation is the cyclic order `(0, 1, 2)`.
//! Swapping two slots of a vertex is the AS orientation flip.

mod canon;
mod enumerate;
mod quotient;
mod stu;

pub use canon::{automorphism_count, canonical_form, Canonical};
pub use enumerate::{enumerate_chord_diagrams, enumerate_connected, enumerate_one_vertex, MAX_DEGREE};
pub use quotient::{quotient_basis, quotient_basis_shuffled, Quotient};
pub use stu::{stu_reduce, stu_reduce_with, stu_at, DiagramSum, ReductionOrder};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum JacobiError {
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("degree {0} is above the supported cap {1}")]
    UnsupportedDegree(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentKind {
    Circle,
    Line,
}

/// The oriented one-manifold: an ordered list of circles and lines.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Support {
    pub components: Vec<ComponentKind>,
}

impl Support {
    pub fn circle() -> Self {
        Support { components: vec![ComponentKind::Circle] }
    }
    pub fn line() -> Self {
        Support { components: vec![ComponentKind::Line] }
    }
    pub fn two_lines() -> Self {
        Support { components: vec![ComponentKind::Line, ComponentKind::Line] }
    }
    pub fn circles(k: usize) -> Self {
        Support { components: vec![ComponentKind::Circle; k] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HalfEdge {
    Leg(usize),
    Tri(usize, u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LegPos {
    pub component: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JacobiDiagram {
    pub support: Support,
    pub legs: Vec<LegPos>,
    pub n_tri: usize,
    pub edges: Vec<(HalfEdge, HalfEdge)>,
}

impl JacobiDiagram {
    /// Builds and validates a diagram; leg ranks are normalized to `0..k` per component.
    pub fn new(support: Support, legs: Vec<LegPos>, n_tri: usize, edges: Vec<(HalfEdge, HalfEdge)>) -> Result<Self, JacobiError> {
        let mut g = JacobiDiagram { support, legs, n_tri, edges };
        g.normalize_ranks();
        g.validate()?;
        Ok(g)
    }

    /// A chord diagram on one component from a list of position pairs.
    pub fn chords(support: Support, pairs: &[(usize, usize)]) -> Result<Self, JacobiError> {
        let mut legs = Vec::new();
        let mut edges = Vec::new();
        for &(a, b) in pairs {
            let i = legs.len();
            legs.push(LegPos { component: 0, rank: a });
            legs.push(LegPos { component: 0, rank: b });
            edges.push((HalfEdge::Leg(i), HalfEdge::Leg(i + 1)));
        }
        JacobiDiagram::new(support, legs, 0, edges)
    }

    pub fn theta() -> Self {
        JacobiDiagram::chords(Support::circle(), &[(0, 1)]).expect("valid")
    }

    /// Two interleaved chords on a circle.
    pub fn x_diagram() -> Self {
        JacobiDiagram::chords(Support::circle(), &[(0, 2), (1, 3)]).expect("valid")
    }

    /// One trivalent vertex joined to three legs on a circle, the vertex cyclic
    /// order agreeing with the circle order of the legs.
    pub fn y_diagram() -> Self {
        let legs = (0..3).map(|r| LegPos { component: 0, rank: r }).collect();
        let edges = (0..3).map(|i| (HalfEdge::Leg(i), HalfEdge::Tri(0, i as u8))).collect();
        JacobiDiagram::new(Support::circle(), legs, 1, edges).expect("valid")
    }

    pub fn n_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self) -> usize {
        (self.legs.len() + self.n_tri) / 2
    }

    pub fn is_chord_diagram(&self) -> bool {
        self.n_tri == 0
    }

    pub fn legs_on(&self, component: usize) -> usize {
        self.legs.iter().filter(|l| l.component == component).count()
    }

    fn normalize_ranks(&mut self) {
        for c in 0..self.support.components.len() {
            let mut idx: Vec<usize> = (0..self.legs.len()).filter(|&i| self.legs[i].component == c).collect();
            idx.sort_by_key(|&i| self.legs[i].rank);
            for (r, i) in idx.into_iter().enumerate() {
                self.legs[i].rank = r;
            }
        }
    }

    /// The half-edge matched with `h`.
    pub fn partner(&self, h: HalfEdge) -> HalfEdge {
        for &(a, b) in &self.edges {
            if a == h {
                return b;
            }
            if b == h {
                return a;
            }
        }
        panic!("half-edge {h:?} not in diagram")
    }

    /// Graph vertex of a half-edge: legs first, then trivalent vertices.
    pub fn vertex_of(&self, h: HalfEdge) -> usize {
        match h {
            HalfEdge::Leg(i) => i,
            HalfEdge::Tri(v, _) => self.legs.len() + v,
        }
    }

    pub fn validate(&self) -> Result<(), JacobiError> {
        let bad = |m: String| Err(JacobiError::InvalidDiagram(m));
        if self.support.components.is_empty() {
            return bad("empty support".into());
        }
        let u = self.legs.len();
        let mut seen_leg = vec![0usize; u];
        let mut seen_tri = vec![[0usize; 3]; self.n_tri];
        for &(a, b) in &self.edges {
            for h in [a, b] {
                match h {
                    HalfEdge::Leg(i) if i < u => seen_leg[i] += 1,
                    HalfEdge::Tri(v, s) if v < self.n_tri && s < 3 => seen_tri[v][s as usize] += 1,
                    _ => return bad(format!("unknown half-edge {h:?}")),
                }
            }
            if let (HalfEdge::Tri(v, _), HalfEdge::Tri(w, _)) = (a, b) {
                if v == w {
                    return bad(format!("simple loop at vertex {v}"));
                }
            }
        }
        if seen_leg.iter().any(|&c| c != 1) || seen_tri.iter().flatten().any(|&c| c != 1) {
            return bad("every half-edge must lie on exactly one edge".into());
        }
        for l in &self.legs {
            if l.component >= self.support.components.len() {
                return bad(format!("leg on missing component {}", l.component));
            }
        }
        let mut pos: Vec<_> = self.legs.iter().map(|l| (l.component, l.rank)).collect();
        pos.sort_unstable();
        pos.dedup();
        if pos.len() != u {
            return bad("two legs share a position".into());
        }
        if (u + self.n_tri) % 2 != 0 {
            return bad("odd number of vertices".into());
        }
        // every connected component of the dashed graph reaches a leg
        let n = u + self.n_tri;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for &(a, b) in &self.edges {
            let (x, y) = (find(&mut parent, self.vertex_of(a)), find(&mut parent, self.vertex_of(b)));
            parent[x] = y;
        }
        let leg_roots: std::collections::HashSet<usize> = (0..u).map(|i| find(&mut parent, i)).collect();
        for v in u..n {
            if !leg_roots.contains(&find(&mut parent, v)) {
                return bad("a connected component has no leg".into());
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.legs.len() + self.n_tri;
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            let (x, y) = (self.vertex_of(a), self.vertex_of(b));
            adj[x].push(y);
            adj[y].push(x);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Same diagram with the orientation of vertex `v` reversed.
    pub fn flip_vertex(&self, v: usize) -> JacobiDiagram {
        let swap = |h: HalfEdge| match h {
            HalfEdge::Tri(w, 1) if w == v => HalfEdge::Tri(w, 2),
            HalfEdge::Tri(w, 2) if w == v => HalfEdge::Tri(w, 1),
            other => other,
        };
        let mut g = self.clone();
        g.edges = g.edges.iter().map(|&(a, b)| (swap(a), swap(b))).collect();
        g
    }

    /// Exchange of the two components of a two-line support.
    pub fn swap_lines(&self) -> JacobiDiagram {
        let mut g = self.clone();
        for l in g.legs.iter_mut() {
            l.component = 1 - l.component;
        }
        g
    }

    /// Parses the text format: a `support:` line, one edge per line as two half-edge
    /// tokens (`Lk.p` is the leg at rank `p` of component `k`, `Tv.h` is half-edge `h`
    /// of trivalent vertex `v`), and optional cyclic orders `Tv: h1 h2 h3`.
    pub fn parse(text: &str) -> Result<Self, JacobiError> {
        let perr = |m: String| JacobiError::Parse(m);
        let mut support = None;
        let mut legs: Vec<LegPos> = Vec::new();
        let mut n_tri = 0usize;
        let mut raw_edges: Vec<(HalfEdge, HalfEdge)> = Vec::new();
        let mut orders: Vec<(usize, [u8; 3])> = Vec::new();

        let mut leg_index = |k: usize, p: usize, legs: &mut Vec<LegPos>| -> usize {
            let pos = LegPos { component: k, rank: p };
            match legs.iter().position(|l| *l == pos) {
                Some(i) => i,
                None => {
                    legs.push(pos);
                    legs.len() - 1
                }
            }
        };
        let half_edge = |tok: &str, legs: &mut Vec<LegPos>, n_tri: &mut usize, leg_index: &mut dyn FnMut(usize, usize, &mut Vec<LegPos>) -> usize| -> Result<HalfEdge, JacobiError> {
            let (head, rest) = tok.split_at(1);
            let (a, b) = rest.split_once('.').ok_or_else(|| perr(format!("bad half-edge {tok:?}")))?;
            let a: usize = a.parse().map_err(|_| perr(format!("bad half-edge {tok:?}")))?;
            let b: usize = b.parse().map_err(|_| perr(format!("bad half-edge {tok:?}")))?;
            match head {
                "L" => Ok(HalfEdge::Leg(leg_index(a, b, legs))),
                "T" if b < 3 => {
                    *n_tri = (*n_tri).max(a + 1);
                    Ok(HalfEdge::Tri(a, b as u8))
                }
                _ => Err(perr(format!("bad half-edge {tok:?}"))),
            }
        };

        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("support:") {
                let comps = rest
                    .split_whitespace()
                    .map(|w| match w {
                        "circle" => Ok(ComponentKind::Circle),
                        "line" => Ok(ComponentKind::Line),
                        _ => Err(perr(format!("unknown component {w:?}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                support = Some(Support { components: comps });
            } else if let Some((v, hs)) = line.split_once(':') {
                let v: usize = v.trim().trim_start_matches('T').parse().map_err(|_| perr(format!("bad order line {line:?}")))?;
                let hs: Vec<u8> = hs.split_whitespace().map(|h| h.parse()).collect::<Result<_, _>>().map_err(|_| perr(format!("bad order line {line:?}")))?;
                let mut sorted = hs.clone();
                sorted.sort_unstable();
                if sorted != [0, 1, 2] {
                    return Err(perr(format!("cyclic order must list 0 1 2: {line:?}")));
                }
                orders.push((v, [hs[0], hs[1], hs[2]]));
            } else {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(perr(format!("edge line needs two half-edges: {line:?}")));
                }
                let a = half_edge(toks[0], &mut legs, &mut n_tri, &mut leg_index)?;
                let b = half_edge(toks[1], &mut legs, &mut n_tri, &mut leg_index)?;
                raw_edges.push((a, b));
            }
        }
        let support = support.ok_or_else(|| perr("missing support line".into()))?;
        // relabel slots so that every declared cyclic order reads (0, 1, 2)
        let mut relabel = vec![[0u8, 1, 2]; n_tri];
        for (v, ord) in orders {
            if v >= n_tri {
                return Err(perr(format!("order for unknown vertex T{v}")));
            }
            for (new, old) in ord.iter().enumerate() {
                relabel[v][*old as usize] = new as u8;
            }
        }
        let map = |h: HalfEdge| match h {
            HalfEdge::Tri(v, s) => HalfEdge::Tri(v, relabel[v][s as usize]),
            leg => leg,
        };
        let edges = raw_edges.into_iter().map(|(a, b)| (map(a), map(b))).collect();
        JacobiDiagram::new(support, legs, n_tri, edges)
    }
}

impl fmt::Display for JacobiDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self
            .support
            .components
            .iter()
            .map(|c| match c {
                ComponentKind::Circle => "circle",
                ComponentKind::Line => "line",
            })
            .collect();
        writeln!(f, "support: {}", names.join(" "))?;
        let tok = |h: HalfEdge| match h {
            HalfEdge::Leg(i) => format!("L{}.{}", self.legs[i].component, self.legs[i].rank),
            HalfEdge::Tri(v, s) => format!("T{v}.{s}"),
        };
        for &(a, b) in &self.edges {
            writeln!(f, "{} {}", tok(a), tok(b))?;
        }
        for v in 0..self.n_tri {
            writeln!(f, "T{v}: 0 1 2")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees() {
        assert_eq!(JacobiDiagram::theta().degree(), 1);
        assert_eq!(JacobiDiagram::y_diagram().degree(), 2);
        assert_eq!(JacobiDiagram::x_diagram().degree(), 2);
    }

    #[test]
    fn rejects_invalid() {
        // a trivalent vertex pair without legs: the theta graph floating alone
        let text = "support: circle\nL0.0 L0.1\nT0.0 T1.0\nT0.1 T1.1\nT0.2 T1.2\n";
        assert!(matches!(JacobiDiagram::parse(text), Err(JacobiError::InvalidDiagram(_))));
        let looped = "support: circle\nL0.0 T0.0\nT0.1 T0.2\n";
        assert!(JacobiDiagram::parse(looped).is_err());
        assert!(JacobiDiagram::parse("L0.0 L0.1").is_err());
    }

    #[test]
    fn parse_display_round_trip() {
        let text = "support: circle\nL0.2 T0.1\nL0.0 T0.0\nL0.1 T0.2\nT0: 0 2 1\n";
        let g = JacobiDiagram::parse(text).unwrap();
        assert_eq!(g.n_tri, 1);
        let again = JacobiDiagram::parse(&g.to_string()).unwrap();
        assert_eq!(again, g);
        let (cg, s) = canonical_form(&g).unwrap().into_parts();
        let (cy, sy) = canonical_form(&JacobiDiagram::y_diagram()).unwrap().into_parts();
        assert_eq!(cg, cy);
        assert_eq!(s, sy);
    }
}
