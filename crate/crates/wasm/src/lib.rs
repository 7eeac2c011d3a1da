//! WebAssembly bindings for the demo page in `www/`. Every call takes a preset
//! name or a link embedding as JSON text and returns JSON text.

use csint::csint::{gauss_linking, shrink_prediction, writhe_integral, SamplerConfig};
use csint::geom::{linking_from_crossings, presets, project_crossings, writhe_from_crossings, LinkEmbedding};
use csint::vec3;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn load(source: &str) -> Result<LinkEmbedding, String> {
    let source = source.trim();
    if source.starts_with('{') {
        let link = LinkEmbedding::from_json(source).map_err(|e| e.to_string())?;
        link.validate().map_err(|e| e.to_string())?;
        Ok(link)
    } else {
        presets::by_name(source).ok_or_else(|| format!("unknown preset {source:?}"))
    }
}

pub fn preset_names() -> String {
    json!(presets::NAMES).to_string()
}

/// Gauss integral of components 0 and 1 on an `n x n` grid, next to the crossing count.
pub fn linking(source: &str, grid: u32) -> Result<String, String> {
    let link = load(source)?;
    if link.len() < 2 {
        return Err("need a link with at least two components".into());
    }
    let n = grid.clamp(8, 1024) as u64;
    let e = gauss_linking(&link, 0, 1, &SamplerConfig::quadrature(n * n)).map_err(|e| e.to_string())?;
    let d = project_crossings(&link, [0.13, 0.21, 0.97]).map_err(|e| e.to_string())?;
    Ok(json!({ "integral": e.value, "std_error": e.std_error, "crossings": linking_from_crossings(&d, 0, 1) }).to_string())
}

/// Planar picture of the projection along `direction`: polylines in the image
/// plane, crossing points with their signs, writhes and pairwise linking numbers.
pub fn projection(source: &str, direction: [f64; 3], samples: u32) -> Result<String, String> {
    let link = load(source)?;
    if vec3::norm(direction) == 0.0 {
        return Err("direction must be nonzero".into());
    }
    let d = project_crossings(&link, direction).map_err(|e| e.to_string())?;
    let (a, b) = vec3::sphere_frame(vec3::normalize(direction));
    let plane = |p: vec3::V3| [vec3::dot(p, a), vec3::dot(p, b)];
    let n = samples.clamp(16, 4096) as usize;
    let lines: Vec<Vec<[f64; 2]>> = link.components.iter().map(|c| c.samples(n).into_iter().map(plane).collect()).collect();
    let crossings: Vec<Value> = d
        .crossings
        .iter()
        .map(|c| {
            let p = plane(link.components[c.over.component].eval(c.over.param));
            json!({ "x": p[0], "y": p[1], "sign": c.sign, "over": c.over.component, "under": c.under.component })
        })
        .collect();
    let k = link.len();
    let writhes: Vec<i64> = (0..k).map(|i| writhe_from_crossings(&d, i)).collect();
    let mut linking = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                linking[i][j] = linking_from_crossings(&d, i, j);
            }
        }
    }
    Ok(json!({ "components": lines, "crossings": crossings, "writhe": writhes, "linking": linking }).to_string())
}

/// Writhe integral of the knot after the horizontal shrink `(l x, l y, z)`,
/// with the limit predicted from the extrema of the height.
pub fn shrink(source: &str, lambda: f64, budget: u32) -> Result<String, String> {
    let link = load(source)?;
    let [k] = link.components.as_slice() else {
        return Err("need a knot".into());
    };
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err("lambda must lie in (0, 1]".into());
    }
    let e = writhe_integral(&k.shrink(lambda), &SamplerConfig::quadrature(budget.max(1000) as u64))
        .map_err(|e| e.to_string())?;
    let prediction = shrink_prediction(k).ok();
    Ok(json!({ "lambda": lambda, "writhe": e.value, "std_error": e.std_error, "prediction_mod1": prediction }).to_string())
}

#[wasm_bindgen(js_name = presets)]
pub fn presets_js() -> String {
    preset_names()
}

#[wasm_bindgen(js_name = linking)]
pub fn linking_js(source: &str, grid: u32) -> Result<String, JsError> {
    linking(source, grid).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = projection)]
pub fn projection_js(source: &str, dx: f64, dy: f64, dz: f64, samples: u32) -> Result<String, JsError> {
    projection(source, [dx, dy, dz], samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = shrink)]
pub fn shrink_js(source: &str, lambda: f64, budget: u32) -> Result<String, JsError> {
    shrink(source, lambda, budget).map_err(|e| JsError::new(&e))
}
