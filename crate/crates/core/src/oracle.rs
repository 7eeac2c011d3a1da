//! Independent combinatorial oracles: Gauss codes from projections, the Conway
//! polynomial by skein resolution, and the directional-average writhe.

use crate::geom::{self, project_crossings, CrossingDiagram, Curve, LinkEmbedding};
use crate::vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Skein nodes visited before giving up.
pub const SKEIN_BUDGET: usize = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("inconsistent Gauss code: {0}")]
    InconsistentDiagram(String),
    #[error("skein resolution exceeded {0} nodes")]
    ResolutionBudgetExceeded(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Visit {
    pub crossing: u32,
    pub over: bool,
    pub sign: i8,
}

/// Per component, the cyclic sequence of crossing visits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaussCode {
    pub components: Vec<Vec<Visit>>,
}

impl GaussCode {
    pub fn new(components: Vec<Vec<Visit>>) -> Result<Self, OracleError> {
        let code = GaussCode { components };
        code.check()?;
        Ok(code)
    }

    fn check(&self) -> Result<(), OracleError> {
        let mut seen: HashMap<u32, (usize, usize, i8)> = HashMap::new();
        for v in self.components.iter().flatten() {
            if v.sign != 1 && v.sign != -1 {
                return Err(OracleError::InconsistentDiagram(format!("sign {} at crossing {}", v.sign, v.crossing)));
            }
            let e = seen.entry(v.crossing).or_insert((0, 0, v.sign));
            if v.over {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
            if e.2 != v.sign {
                return Err(OracleError::InconsistentDiagram(format!("crossing {} has two signs", v.crossing)));
            }
        }
        match seen.iter().find(|(_, &(o, u, _))| o != 1 || u != 1) {
            Some((id, _)) => Err(OracleError::InconsistentDiagram(format!("crossing {id} must be visited once over and once under"))),
            None => Ok(()),
        }
    }

    pub fn crossing_count(&self) -> usize {
        self.components.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Mirror image: every crossing switched.
    pub fn mirror(&self) -> GaussCode {
        GaussCode {
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|v| Visit { crossing: v.crossing, over: !v.over, sign: -v.sign }).collect())
                .collect(),
        }
    }

    /// Parses one component per line, tokens like `+1O,-2U`.
    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let bad = |t: &str| OracleError::InconsistentDiagram(format!("bad token {t:?}"));
        let mut components = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let mut comp = Vec::new();
            if line != "-" {
                for tok in line.split(',').map(str::trim) {
                    let sign = match tok.chars().next() {
                        Some('+') => 1,
                        Some('-') => -1,
                        _ => return Err(bad(tok)),
                    };
                    let over = match tok.chars().last() {
                        Some('O') => true,
                        Some('U') => false,
                        _ => return Err(bad(tok)),
                    };
                    let crossing = tok[1..tok.len() - 1].parse().map_err(|_| bad(tok))?;
                    comp.push(Visit { crossing, over, sign });
                }
            }
            components.push(comp);
        }
        GaussCode::new(components)
    }
}

impl fmt::Display for GaussCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for comp in &self.components {
            if comp.is_empty() {
                writeln!(f, "-")?;
                continue;
            }
            let toks: Vec<String> = comp
                .iter()
                .map(|v| format!("{}{}{}", if v.sign > 0 { '+' } else { '-' }, v.crossing, if v.over { 'O' } else { 'U' }))
                .collect();
            writeln!(f, "{}", toks.join(","))?;
        }
        Ok(())
    }
}

/// Reads the Gauss code off a crossing diagram, visits ordered by curve parameter.
pub fn gauss_code(d: &CrossingDiagram) -> Result<GaussCode, OracleError> {
    let mut comps: Vec<Vec<(f64, Visit)>> = vec![Vec::new(); d.components];
    for (id, c) in d.crossings.iter().enumerate() {
        let id = id as u32;
        comps[c.over.component].push((c.over.param, Visit { crossing: id, over: true, sign: c.sign }));
        comps[c.under.component].push((c.under.param, Visit { crossing: id, over: false, sign: c.sign }));
    }
    let components = comps
        .into_iter()
        .map(|mut v| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v.into_iter().map(|(_, x)| x).collect()
        })
        .collect();
    GaussCode::new(components)
}

/// Conway polynomial as integer coefficients of `1, z, z^2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConwayPolynomial {
    pub coefficients: Vec<i64>,
}

impl ConwayPolynomial {
    fn from_vec(mut v: Vec<i64>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        ConwayPolynomial { coefficients: v }
    }

    pub fn coefficient(&self, power: usize) -> i64 {
        self.coefficients.get(power).copied().unwrap_or(0)
    }
}

impl fmt::Display for ConwayPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}z"),
                _ => format!("{c}z^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Conway polynomial of the diagram by skein resolution towards descending diagrams.
pub fn conway(code: &GaussCode) -> Result<ConwayPolynomial, OracleError> {
    code.check()?;
    let mut budget = SKEIN_BUDGET;
    let mut memo = HashMap::new();
    resolve(&normalize(code.clone()), &mut budget, &mut memo).map(ConwayPolynomial::from_vec)
}

/// Coefficient of `z^2`, which equals half the second derivative at 1 of the
/// symmetrized Alexander polynomial.
pub fn a2(code: &GaussCode) -> Result<i64, OracleError> {
    Ok(conway(code)?.coefficient(2))
}

// Removes Reidemeister-I kinks (a crossing visited twice in a row) and relabels
// crossings by first appearance, so equal diagrams share memo entries.
fn normalize(mut code: GaussCode) -> GaussCode {
    loop {
        let mut kink = None;
        'search: for comp in &code.components {
            let n = comp.len();
            for i in 0..n {
                if n >= 2 && comp[i].crossing == comp[(i + 1) % n].crossing {
                    kink = Some(comp[i].crossing);
                    break 'search;
                }
            }
        }
        match kink {
            Some(id) => code.components.iter_mut().for_each(|c| c.retain(|v| v.crossing != id)),
            None => break,
        }
    }
    let mut relabel = HashMap::new();
    for comp in code.components.iter_mut() {
        for v in comp.iter_mut() {
            let next = relabel.len() as u32;
            v.crossing = *relabel.entry(v.crossing).or_insert(next);
        }
    }
    code
}

type Memo = HashMap<GaussCode, Vec<i64>>;

fn resolve(code: &GaussCode, budget: &mut usize, memo: &mut Memo) -> Result<Vec<i64>, OracleError> {
    if let Some(v) = memo.get(code) {
        return Ok(v.clone());
    }
    if *budget == 0 {
        return Err(OracleError::ResolutionBudgetExceeded(SKEIN_BUDGET));
    }
    *budget -= 1;

    // descending: every crossing is first met from above, walking the components in order
    let mut met = std::collections::HashSet::new();
    let mut bad = None;
    'walk: for comp in &code.components {
        for v in comp {
            if met.insert(v.crossing) && !v.over {
                bad = Some((v.crossing, v.sign));
                break 'walk;
            }
        }
    }
    let result = match bad {
        None => {
            if code.components.len() == 1 {
                vec![1]
            } else {
                vec![]
            }
        }
        Some((id, sign)) => {
            // grad(D) = grad(D switched) + sign * z * grad(D smoothed)
            let switched = normalize(switch(code, id));
            let smoothed = normalize(smooth(code, id));
            let a = resolve(&switched, budget, memo)?;
            let b = resolve(&smoothed, budget, memo)?;
            let mut out = vec![0; a.len().max(b.len() + 1)];
            for (k, c) in a.iter().enumerate() {
                out[k] += c;
            }
            for (k, c) in b.iter().enumerate() {
                out[k + 1] += sign as i64 * c;
            }
            while out.last() == Some(&0) {
                out.pop();
            }
            out
        }
    };
    memo.insert(code.clone(), result.clone());
    Ok(result)
}

fn switch(code: &GaussCode, id: u32) -> GaussCode {
    let mut out = code.clone();
    for v in out.components.iter_mut().flatten() {
        if v.crossing == id {
            v.over = !v.over;
            v.sign = -v.sign;
        }
    }
    out
}

// Oriented smoothing: splits a component through a self-crossing or merges the two
// components meeting at the crossing.
fn smooth(code: &GaussCode, id: u32) -> GaussCode {
    let pos: Vec<(usize, usize)> = code
        .components
        .iter()
        .enumerate()
        .flat_map(|(c, comp)| comp.iter().enumerate().filter(|(_, v)| v.crossing == id).map(move |(i, _)| (c, i)))
        .collect();
    let (p, q) = (pos[0], pos[1]);
    let mut comps: Vec<Vec<Visit>> = Vec::new();
    if p.0 == q.0 {
        let comp = &code.components[p.0];
        let inner: Vec<Visit> = comp[p.1 + 1..q.1].to_vec();
        let outer: Vec<Visit> = comp[q.1 + 1..].iter().chain(&comp[..p.1]).copied().collect();
        for (c, comp) in code.components.iter().enumerate() {
            if c == p.0 {
                comps.push(inner.clone());
                comps.push(outer.clone());
            } else {
                comps.push(comp.clone());
            }
        }
    } else {
        let a = &code.components[p.0];
        let b = &code.components[q.0];
        let rot = |comp: &Vec<Visit>, i: usize| -> Vec<Visit> { comp[i + 1..].iter().chain(&comp[..i]).copied().collect() };
        let mut merged = rot(a, p.1);
        merged.extend(rot(b, q.1));
        for (c, comp) in code.components.iter().enumerate() {
            if c == p.0 {
                comps.push(merged.clone());
            } else if c != q.0 {
                comps.push(comp.clone());
            }
        }
    }
    GaussCode { components: comps }
}

/// Conway polynomial of a link read from its projection along `direction`.
pub fn conway_of(link: &LinkEmbedding, direction: [f64; 3]) -> Result<ConwayPolynomial, Box<dyn std::error::Error>> {
    let d = project_crossings(link, direction)?;
    Ok(conway(&gauss_code(&d)?)?)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WritheAverage {
    pub value: f64,
    pub std_error: f64,
    pub directions: usize,
}

/// Mean over random projection directions of the signed self-crossing count.
///
/// Directions are drawn uniformly on the upper hemisphere (a projection along `-v`
/// has the same writhe as along `v`); non-generic draws are redrawn.
pub fn directional_writhe(k: &Curve, n_directions: usize, seed: u64) -> WritheAverage {
    assert!(n_directions >= 100, "need at least 100 directions");
    use rayon::prelude::*;
    let link = LinkEmbedding::knot(k.clone());
    let values: Vec<f64> = (0..n_directions)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            loop {
                // stratified in height: the cosine of the polar angle is uniform
                let zc = (i as f64 + rng.random::<f64>()) / n_directions as f64;
                let phi = std::f64::consts::TAU * rng.random::<f64>();
                let r = (1.0 - zc * zc).max(0.0).sqrt();
                let dir = [r * phi.cos(), r * phi.sin(), zc];
                if vec3::norm(dir) == 0.0 {
                    continue;
                }
                if let Ok(d) = project_crossings(&link, dir) {
                    break geom::writhe_from_crossings(&d, 0) as f64;
                }
            }
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    WritheAverage { value: mean, std_error: (var / n).sqrt(), directions: n_directions }
}
