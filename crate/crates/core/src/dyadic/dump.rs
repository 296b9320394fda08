use serde_json::{json, Value};

use super::measure::DyadicMeasure;
use crate::construct::basic::table;
use crate::error::{BlochError, Result};
use crate::rational::{from_json_pair, to_json_pair};

/// `{ "total_mass": [n, d], "depth": D, "arcs": [{ "level", "index", "mass" }, ...] }` with every
/// arc of level `D`, in index order.
pub fn measure_dump(measure: &DyadicMeasure, depth: u32) -> Result<Value> {
    let masses = measure.level_masses(depth)?;
    let arcs: Vec<Value> = masses
        .iter()
        .enumerate()
        .map(|(k, m)| json!({ "level": depth, "index": k, "mass": to_json_pair(m) }))
        .collect();
    Ok(json!({
        "total_mass": to_json_pair(measure.total_mass()),
        "depth": depth,
        "arcs": arcs,
    }))
}

/// Rebuilds a measure from a dump. With `extend_uniform`, mass is spread uniformly inside each
/// dumped arc below the dump depth; otherwise deeper queries fail.
pub fn load_measure(v: &Value, extend_uniform: bool) -> Result<DyadicMeasure> {
    let depth = v["depth"].as_u64().ok_or_else(|| BlochError::Parse("measure dump needs \"depth\"".into()))? as u32;
    let total = from_json_pair(&v["total_mass"])?;
    let arcs = v["arcs"].as_array().ok_or_else(|| BlochError::Parse("measure dump needs \"arcs\"".into()))?;
    let mut leaves = vec![None; 1usize << depth];
    for a in arcs {
        let level = a["level"].as_u64().ok_or_else(|| BlochError::Parse("arc without level".into()))?;
        let index = a["index"].as_u64().ok_or_else(|| BlochError::Parse("arc without index".into()))? as usize;
        if level != depth as u64 || index >= leaves.len() {
            return Err(BlochError::Parse(format!("arc ({level}, {index}) is not a level-{depth} arc")));
        }
        leaves[index] = Some(from_json_pair(&a["mass"])?);
    }
    let leaves = leaves
        .into_iter()
        .enumerate()
        .map(|(k, m)| m.ok_or_else(|| BlochError::Parse(format!("missing arc ({depth}, {k})"))))
        .collect::<Result<Vec<_>>>()?;
    let measure = table(depth, leaves, extend_uniform)?;
    if *measure.total_mass() != total {
        return Err(BlochError::Parse("arc masses do not sum to total_mass".into()));
    }
    Ok(measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::basic::point_mass;
    use crate::dyadic::DyadicArc;
    use crate::rational::{int, ratio};

    #[test]
    fn dump_and_reload() {
        let m = point_mass(ratio(2, 7), int(3));
        let v = measure_dump(&m, 5).unwrap();
        assert_eq!(v["arcs"].as_array().unwrap().len(), 32);
        let back = load_measure(&v, false).unwrap();
        for k in 0..32 {
            let a = DyadicArc::new(5, k).unwrap();
            assert_eq!(back.mass(a).unwrap(), m.mass(a).unwrap());
        }
    }

    #[test]
    fn rejects_inconsistent_total() {
        let m = point_mass(ratio(2, 7), int(3));
        let mut v = measure_dump(&m, 2).unwrap();
        v["total_mass"] = to_json_pair(&int(2));
        assert!(load_measure(&v, false).is_err());
    }
}
