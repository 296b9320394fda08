//! Closed sets of the circle described by their surviving dyadic arcs.

use num_traits::Zero;
use serde_json::{json, Value};

use super::arc::{DyadicArc, MAX_LEVEL};
use crate::error::{BlochError, Result};
use crate::rational::{self, Rational};

/// Which children of a surviving arc survive in a level pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    Both,
    Left,
    Right,
}

/// A rule that decides membership at any level, beyond the materialized depth.
#[derive(Clone, Debug, PartialEq)]
pub enum SetGenerator {
    /// Finitely many points; an arc meets the set when its closed interval contains a point.
    Points(Vec<Rational>),
    /// Level-by-level child selection: `prefix` for the first transitions, then `cycle` repeated.
    Pattern { prefix: Vec<Keep>, cycle: Vec<Keep> },
}

impl SetGenerator {
    fn keep_at(prefix: &[Keep], cycle: &[Keep], level: u32) -> Keep {
        let step = (level - 1) as usize;
        if step < prefix.len() {
            prefix[step]
        } else {
            cycle[(step - prefix.len()) % cycle.len()]
        }
    }

    fn meets(&self, arc: DyadicArc) -> bool {
        match self {
            SetGenerator::Points(points) => {
                // points are sorted; find the first point >= start
                let start = arc.start();
                let end = &start + arc.length();
                let i = points.partition_point(|p| *p < start);
                i < points.len() && points[i] <= end
            }
            SetGenerator::Pattern { prefix, cycle } => (1..=arc.level).all(|n| {
                let bit = (arc.index >> (arc.level - n)) & 1;
                match Self::keep_at(prefix, cycle, n) {
                    Keep::Both => true,
                    Keep::Left => bit == 0,
                    Keep::Right => bit == 1,
                }
            }),
        }
    }
}

/// The arcs, generation by generation, whose closed arcs meet a closed set `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicClosedSet {
    depth: u32,
    survivors: Vec<Vec<u64>>,
    generator: Option<SetGenerator>,
}

impl DyadicClosedSet {
    /// A finite set of points `θ ∈ [0, 1)`, materialized to `depth`.
    pub fn from_points(points: Vec<Rational>, depth: u32) -> Result<Self> {
        if points.is_empty() {
            return Err(BlochError::InvalidArgument("closed set must be nonempty".into()));
        }
        let one = rational::int(1);
        if points.iter().any(|p| *p < Rational::zero() || *p >= one) {
            return Err(BlochError::InvalidArgument("points must lie in [0, 1)".into()));
        }
        let mut points = points;
        points.sort();
        points.dedup();
        Self::from_generator(SetGenerator::Points(points), depth)
    }

    pub fn from_pattern(prefix: Vec<Keep>, cycle: Vec<Keep>, depth: u32) -> Result<Self> {
        if cycle.is_empty() {
            return Err(BlochError::InvalidArgument("pattern cycle must be nonempty".into()));
        }
        Self::from_generator(SetGenerator::Pattern { prefix, cycle }, depth)
    }

    /// Cantor-type set: both children survive at odd generations, only the left one at even ones.
    pub fn alternating_cantor(depth: u32) -> Result<Self> {
        Self::from_pattern(vec![], vec![Keep::Both, Keep::Left], depth)
    }

    /// Half the arcs survive at every generation: the left half circle refined uniformly.
    pub fn half_density(depth: u32) -> Result<Self> {
        Self::from_pattern(vec![Keep::Left], vec![Keep::Both], depth)
    }

    fn from_generator(generator: SetGenerator, depth: u32) -> Result<Self> {
        if depth > MAX_LEVEL {
            return Err(BlochError::InvalidArgument(format!("depth {depth} exceeds {MAX_LEVEL}")));
        }
        let mut survivors = vec![vec![0u64]];
        for n in 1..=depth {
            let mut level = Vec::new();
            for &k in &survivors[(n - 1) as usize] {
                let parent = DyadicArc { level: n - 1, index: k };
                for c in parent.children() {
                    if generator.meets(c) {
                        level.push(c.index);
                    }
                }
            }
            survivors.push(level);
        }
        let set = Self { depth, survivors, generator: Some(generator) };
        set.validate()?;
        Ok(set)
    }

    /// An explicit table of survivors, one sorted index list per level `0..=depth`.
    pub fn from_survivors(survivors: Vec<Vec<u64>>) -> Result<Self> {
        if survivors.is_empty() {
            return Err(BlochError::InvalidArgument("survivor table needs level 0".into()));
        }
        let depth = (survivors.len() - 1) as u32;
        let mut survivors = survivors;
        for (n, level) in survivors.iter_mut().enumerate() {
            level.sort_unstable();
            level.dedup();
            if level.iter().any(|&k| k >= DyadicArc::count(n as u32)) {
                return Err(BlochError::InvalidArgument(format!("survivor index out of range at level {n}")));
            }
        }
        let set = Self { depth, survivors, generator: None };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        if self.survivors[0] != [0] {
            return Err(BlochError::InvalidArgument("level 0 must consist of the whole circle".into()));
        }
        for (n, level) in self.survivors.iter().enumerate() {
            if level.is_empty() {
                return Err(BlochError::InvalidArgument(format!("no survivors at level {n}")));
            }
        }
        if !self.is_nested() {
            return Err(BlochError::InvalidArgument("survivors are not nested".into()));
        }
        // every survivor above the last level keeps at least one child
        for n in 0..self.depth as usize {
            let next = &self.survivors[n + 1];
            for &k in &self.survivors[n] {
                if next.binary_search(&(2 * k)).is_err() && next.binary_search(&(2 * k + 1)).is_err() {
                    return Err(BlochError::InvalidArgument(format!(
                        "survivor ({n}, {k}) has no surviving child"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn generator(&self) -> Option<&SetGenerator> {
        self.generator.as_ref()
    }

    pub fn survivors(&self, level: u32) -> &[u64] {
        &self.survivors[level as usize]
    }

    pub fn survivor_arcs(&self, level: u32) -> impl Iterator<Item = DyadicArc> + '_ {
        self.survivors[level as usize].iter().map(move |&k| DyadicArc { level, index: k })
    }

    pub fn is_nested(&self) -> bool {
        self.survivors.windows(2).all(|w| w[1].iter().all(|k| w[0].binary_search(&(k >> 1)).is_ok()))
    }

    /// First generation `n >= 1` at which every arc survives.
    pub fn full_generation(&self) -> Option<u32> {
        (1..=self.depth).find(|&n| self.survivors[n as usize].len() as u64 == DyadicArc::count(n))
    }

    /// Whether the closed arc meets the set. Beyond the materialized depth a table-only set is
    /// approximated by its depth-level survivors.
    pub fn meets(&self, arc: DyadicArc) -> bool {
        if arc.level <= self.depth {
            return self.survivors[arc.level as usize].binary_search(&arc.index).is_ok();
        }
        match &self.generator {
            Some(g) => g.meets(arc),
            None => {
                let anc = arc.ancestor(self.depth).expect("depth below arc level");
                self.survivors[self.depth as usize].binary_search(&anc.index).is_ok()
            }
        }
    }

    /// The same set materialized to another depth (table-only sets can only be truncated).
    pub fn with_depth(&self, depth: u32) -> Result<Self> {
        match &self.generator {
            Some(g) => Self::from_generator(g.clone(), depth),
            None if depth <= self.depth => Self::from_survivors(self.survivors[..=depth as usize].to_vec()),
            None => Err(BlochError::BeyondAuthoritativeDepth { arc: DyadicArc { level: depth, index: 0 }, depth: self.depth }),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "depth": self.depth, "survivors": self.survivors });
        if let Some(SetGenerator::Points(points)) = &self.generator {
            v["points"] = Value::Array(points.iter().map(rational::to_json_pair).collect());
        }
        v
    }

    /// Reads a closed-set dump. A `"points"` entry, when present, rebuilds the generator.
    pub fn from_json(v: &Value) -> Result<Self> {
        let depth = v["depth"].as_u64().ok_or_else(|| BlochError::Parse("closed set needs \"depth\"".into()))? as u32;
        if let Some(points) = v.get("points").and_then(Value::as_array) {
            let pts = points
                .iter()
                .map(|p| match p {
                    Value::String(s) => rational::parse(s),
                    other => rational::from_json_pair(other),
                })
                .collect::<Result<Vec<_>>>()?;
            return Self::from_points(pts, depth);
        }
        let survivors: Vec<Vec<u64>> = serde_json::from_value(v["survivors"].clone())?;
        if survivors.len() as u32 != depth + 1 {
            return Err(BlochError::Parse("survivor table length must be depth + 1".into()));
        }
        Self::from_survivors(survivors)
    }
}
