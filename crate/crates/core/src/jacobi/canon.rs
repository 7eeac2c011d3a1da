use super::{ComponentKind, HalfEdge, JacobiDiagram, JacobiError, LegPos};
use std::collections::BTreeMap;

/// Canonical representative with the sign relating it to the input
/// (`input = sign * diagram`); `sign == 0` when AS forces the diagram to vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canonical {
    pub diagram: JacobiDiagram,
    pub sign: i8,
    pub automorphisms: usize,
}

impl Canonical {
    pub fn into_parts(self) -> (JacobiDiagram, i8) {
        (self.diagram, self.sign)
    }
}

struct Labeling {
    new_gid: Vec<usize>,
}

fn parity3(p: [usize; 3]) -> i8 {
    let mut inv = 0;
    for i in 0..3 {
        for j in i + 1..3 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

struct Ctx<'a> {
    g: &'a JacobiDiagram,
    u: usize,
    // neighbours of every graph vertex, in slot order for trivalent vertices
    nbrs: Vec<Vec<usize>>,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a JacobiDiagram) -> Self {
        let u = g.legs.len();
        let n = u + g.n_tri;
        let mut nbrs = vec![Vec::new(); n];
        for x in 0..u {
            nbrs[x].push(g.vertex_of(g.partner(HalfEdge::Leg(x))));
        }
        for v in 0..g.n_tri {
            for s in 0..3u8 {
                nbrs[u + v].push(g.vertex_of(g.partner(HalfEdge::Tri(v, s))));
            }
        }
        Ctx { g, u, nbrs }
    }

    fn leg_maps(&self) -> Vec<Vec<usize>> {
        let g = self.g;
        let ncomp = g.support.components.len();
        let per: Vec<Vec<usize>> = (0..ncomp)
            .map(|c| {
                let mut v: Vec<usize> = (0..self.u).filter(|&i| g.legs[i].component == c).collect();
                v.sort_by_key(|&i| g.legs[i].rank);
                v
            })
            .collect();
        let offsets: Vec<usize> = per.iter().scan(0, |acc, v| { let o = *acc; *acc += v.len(); Some(o) }).collect();
        let mut maps = vec![vec![0usize; self.u]];
        for c in 0..ncomp {
            let k = per[c].len();
            let rots = if g.support.components[c] == ComponentKind::Circle && k > 0 { k } else { 1 };
            let mut next = Vec::with_capacity(maps.len() * rots);
            for m in &maps {
                for r in 0..rots {
                    let mut m = m.clone();
                    for (rank, &leg) in per[c].iter().enumerate() {
                        m[leg] = offsets[c] + (rank + k - r) % k.max(1);
                    }
                    next.push(m);
                }
            }
            maps = next;
        }
        maps
    }

    fn discover(&self, leg_map: &[usize], out: &mut Vec<Labeling>) {
        let u = self.u;
        let n = self.nbrs.len();
        let mut new_gid = vec![usize::MAX; n];
        for (x, &m) in leg_map.iter().enumerate() {
            new_gid[x] = m;
        }
        let mut by_label = vec![0usize; u];
        for (x, &m) in leg_map.iter().enumerate() {
            by_label[m] = x;
        }
        self.branch(by_label, new_gid, 0, out);
    }

    // `seq` is the processing sequence: legs in new order followed by discovered trivalent vertices.
    fn branch(&self, mut seq: Vec<usize>, mut new_gid: Vec<usize>, mut pos: usize, out: &mut Vec<Labeling>) {
        let u = self.u;
        while pos < seq.len() {
            let x = seq[pos];
            pos += 1;
            let mut fresh: Vec<usize> = Vec::new();
            for &y in &self.nbrs[x] {
                if y >= u && new_gid[y] == usize::MAX && !fresh.contains(&y) {
                    fresh.push(y);
                }
            }
            match fresh.len() {
                0 => {}
                1 => {
                    new_gid[fresh[0]] = seq.len();
                    seq.push(fresh[0]);
                }
                _ => {
                    for order in [[fresh[0], fresh[1]], [fresh[1], fresh[0]]] {
                        let (mut s2, mut g2) = (seq.clone(), new_gid.clone());
                        for y in order {
                            g2[y] = s2.len();
                            s2.push(y);
                        }
                        self.branch(s2, g2, pos, out);
                    }
                    return;
                }
            }
        }
        // trivalent labels were stored as sequence positions; legs occupy 0..u
        out.push(Labeling { new_gid });
    }

    fn encoding(&self, lab: &Labeling) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .g
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (lab.new_gid[self.g.vertex_of(a)], lab.new_gid[self.g.vertex_of(b)]);
                (x.min(y), x.max(y))
            })
            .collect();
        e.sort_unstable();
        e
    }

    // Edge indices grouped by unordered vertex pair, each group in index order.
    fn parallel_classes(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut m: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, &(a, b)) in self.g.edges.iter().enumerate() {
            let (x, y) = (self.g.vertex_of(a), self.g.vertex_of(b));
            m.entry((x.min(y), x.max(y))).or_default().push(i);
        }
        m
    }
}

/// Sign of the automorphism `phi` (old vertex -> old vertex) as a product of slot parities.
fn automorphism_sign(ctx: &Ctx, phi: &[usize], classes: &BTreeMap<(usize, usize), Vec<usize>>) -> i8 {
    let g = ctx.g;
    let u = ctx.u;
    let mut edge_map = vec![0usize; g.edges.len()];
    for (&(x, y), es) in classes {
        let (px, py) = (phi[x], phi[y]);
        let target = &classes[&(px.min(py), px.max(py))];
        for (k, &e) in es.iter().enumerate() {
            edge_map[e] = target[k];
        }
    }
    let mut sign = 1i8;
    for v in 0..g.n_tri {
        let pv = phi[u + v] - u;
        let mut perm = [0usize; 3];
        for s in 0..3u8 {
            let e = g.edges.iter().position(|&(a, b)| a == HalfEdge::Tri(v, s) || b == HalfEdge::Tri(v, s)).unwrap();
            let (a, b) = g.edges[edge_map[e]];
            let end = if matches!(a, HalfEdge::Tri(w, _) if w == pv) { a } else { b };
            match end {
                HalfEdge::Tri(_, t) => perm[s as usize] = t as usize,
                _ => unreachable!(),
            }
        }
        sign *= parity3(perm);
    }
    sign
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Canonical form under relabelings that preserve the support orientation and,
/// on circles, rotate the leg positions.
pub fn canonical_form(g: &JacobiDiagram) -> Result<Canonical, JacobiError> {
    g.validate()?;
    let ctx = Ctx::new(g);
    let u = ctx.u;
    let mut labelings = Vec::new();
    for m in ctx.leg_maps() {
        ctx.discover(&m, &mut labelings);
    }
    let encs: Vec<_> = labelings.iter().map(|l| ctx.encoding(l)).collect();
    let min = encs.iter().min().cloned().unwrap_or_default();
    let best: Vec<usize> = (0..labelings.len()).filter(|&i| encs[i] == min).collect();
    let classes = ctx.parallel_classes();
    let l0 = &labelings[best[0]];
    let n = ctx.nbrs.len();
    let mut inv0 = vec![0usize; n];
    for x in 0..n {
        inv0[l0.new_gid[x]] = x;
    }
    let mut vanishes = false;
    for &i in &best[1..] {
        let lk = &labelings[i];
        let phi: Vec<usize> = (0..n).map(|x| inv0[lk.new_gid[x]]).collect();
        if automorphism_sign(&ctx, &phi, &classes) < 0 {
            vanishes = true;
            break;
        }
    }
    let mult: usize = classes.values().map(|es| factorial(es.len())).product();
    let automorphisms = best.len() * mult;

    // build the representative from l0
    let mut legs = vec![LegPos { component: 0, rank: 0 }; u];
    {
        let mut counts = vec![0usize; g.support.components.len()];
        let mut firsts = vec![0usize; g.support.components.len()];
        for l in &g.legs {
            counts[l.component] += 1;
        }
        for c in 1..counts.len() {
            firsts[c] = firsts[c - 1] + counts[c - 1];
        }
        for x in 0..u {
            let c = g.legs[x].component;
            legs[l0.new_gid[x]] = LegPos { component: c, rank: l0.new_gid[x] - firsts[c] };
        }
    }
    let mut sign = 1i8;
    let mut new_half = BTreeMap::new();
    for v in 0..g.n_tri {
        let mut keyed: Vec<((usize, usize), u8)> = (0..3u8)
            .map(|s| {
                let h = HalfEdge::Tri(v, s);
                let e = g.edges.iter().position(|&(a, b)| a == h || b == h).unwrap();
                let other = g.vertex_of(g.partner(h));
                let x = u + v;
                let class = &classes[&(x.min(other), x.max(other))];
                let k = class.iter().position(|&f| f == e).unwrap();
                ((l0.new_gid[other], k), s)
            })
            .collect();
        keyed.sort_unstable();
        let mut perm = [0usize; 3];
        for (new, &(_, s)) in keyed.iter().enumerate() {
            perm[s as usize] = new;
            new_half.insert(HalfEdge::Tri(v, s), HalfEdge::Tri(l0.new_gid[u + v] - u, new as u8));
        }
        sign *= parity3(perm);
    }
    let map = |h: HalfEdge| match h {
        HalfEdge::Leg(x) => HalfEdge::Leg(l0.new_gid[x]),
        t => new_half[&t],
    };
    let mut edges: Vec<(HalfEdge, HalfEdge)> = g
        .edges
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (map(a), map(b));
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    let diagram = JacobiDiagram { support: g.support.clone(), legs, n_tri: g.n_tri, edges };
    Ok(Canonical { diagram, sign: if vanishes { 0 } else { sign }, automorphisms })
}

/// Order of the automorphism group of the underlying graph (legs kept on their
/// components, circle legs allowed to rotate, parallel edges permuted).
pub fn automorphism_count(g: &JacobiDiagram) -> Result<usize, JacobiError> {
    Ok(canonical_form(g)?.automorphisms)
}
