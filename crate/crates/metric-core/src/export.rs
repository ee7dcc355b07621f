//! Geodesic polylines as CSV and crossing summaries as JSON.

use serde_json::json;
use std::fmt::Write;

use crate::dijkstra::CrossingResult;
use crate::weights::WeightGrid;

/// `x,y` header plus one row per geodesic node.
pub fn geodesic_csv(cr: &CrossingResult, wg: &WeightGrid) -> String {
    let mut s = String::from("x,y\n");
    for (x, y) in cr.polyline(wg) {
        writeln!(s, "{x},{y}").unwrap();
    }
    s
}

pub fn crossing_json(cr: &CrossingResult, n: f64, seed: u64) -> serde_json::Value {
    json!({
        "rect": [cr.rect.x0, cr.rect.y0, cr.rect.x1, cr.rect.y1],
        "orientation": cr.orientation,
        "length": cr.length,
        "n": n,
        "seed": seed,
    })
}
