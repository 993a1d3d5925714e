//! Versioned structured text formats. Every format starts with a
//! `<name> <version>` line; fields are whitespace-separated tokens; floats
//! print through the shortest round-trip `Display` form; lines starting
//! with `#` are ignored on read. Save and load are exact inverses.

use std::path::Path;

use umr_core::graph::{connected_components, Edge, PlanarGraph};
use umr_core::solver::{validate_hierarchy, IntegerHierarchy, TraceRow};
use umr_core::weights::LevelSchedule;

use crate::error::CliError;

pub const INSTANCE_FORMAT: &str = "umr 1";
pub const HIERARCHY_FORMAT: &str = "umr-hierarchy 1";
pub const ULTRAMETRIC_FORMAT: &str = "umr-ultrametric 1";
pub const SUMMARY_FORMAT: &str = "umr-summary 1";
pub const BASELINE_FORMAT: &str = "umr-baseline 1";
pub const ABLATE_FORMAT: &str = "umr-ablate 1";
pub const ORACLE_FORMAT: &str = "umr-oracle 1";

/// Shortest decimal form that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    x.to_string()
}

/// One instance document: an embedded graph with per-edge targets, an
/// optional level schedule, and free-form metadata.
#[derive(Debug, Clone)]
pub struct InstanceFile {
    pub graph: PlanarGraph,
    pub schedule: Option<LevelSchedule>,
    pub meta: Vec<(String, String)>,
}

impl InstanceFile {
    pub fn new(graph: PlanarGraph, schedule: Option<LevelSchedule>) -> Self {
        InstanceFile { graph, schedule, meta: Vec::new() }
    }

    /// Display name: the `name` metadata entry if present, else the file
    /// stem, else a placeholder.
    pub fn name(&self, path: &Path) -> String {
        for (key, value) in &self.meta {
            if key == "name" {
                return value.clone();
            }
        }
        path.file_stem().map_or_else(|| "instance".to_string(), |s| s.to_string_lossy().into_owned())
    }

    pub fn save(&self) -> String {
        let g = &self.graph;
        let mut out = String::new();
        out.push_str(INSTANCE_FORMAT);
        out.push('\n');
        out.push_str(&format!("vertices {}\n", g.num_vertices()));
        out.push_str(&format!("edges {}\n", g.num_edges()));
        for e in g.edges() {
            out.push_str(&format!(
                "edge {} {} {} {}\n",
                e.u,
                e.v,
                fmt_f64(e.theta),
                fmt_f64(e.length)
            ));
        }
        for v in 0..g.num_vertices() {
            out.push_str(&format!("rotation {}", v));
            for &e in g.rotation(v) {
                out.push_str(&format!(" {e}"));
            }
            out.push('\n');
        }
        if let Some(schedule) = &self.schedule {
            out.push_str("schedule");
            for &d in schedule.deltas() {
                out.push_str(&format!(" {}", fmt_f64(d)));
            }
            out.push('\n');
        }
        for (key, value) in &self.meta {
            out.push_str(&format!("meta {key} {value}\n"));
        }
        out
    }

    pub fn load(path: &str, text: &str) -> Result<InstanceFile, CliError> {
        let mut lines = Lines::new(path, text);
        lines.expect_header(INSTANCE_FORMAT)?;
        let n: usize = lines.keyed_value("vertices")?;
        let m: usize = lines.keyed_value("edges")?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let fields = lines.keyed_fields("edge", 4)?;
            let u = lines.parse_field::<usize>(&fields[0], "edge endpoint")?;
            let v = lines.parse_field::<usize>(&fields[1], "edge endpoint")?;
            let theta = lines.parse_field::<f64>(&fields[2], "edge theta")?;
            let length = lines.parse_field::<f64>(&fields[3], "edge length")?;
            edges.push(Edge::new(u, v, theta, length));
        }
        let mut rotation = Vec::with_capacity(n);
        for v in 0..n {
            let fields = lines.keyed_rest("rotation")?;
            if fields.first().map(String::as_str) != Some(&v.to_string()[..]) {
                return Err(lines.fail(&format!("expected the rotation of vertex {v}")));
            }
            let mut around = Vec::with_capacity(fields.len() - 1);
            for f in &fields[1..] {
                around.push(lines.parse_field::<usize>(f, "rotation edge id")?);
            }
            rotation.push(around);
        }
        let mut schedule = None;
        let mut meta = Vec::new();
        while let Some(fields) = lines.next_fields()? {
            match fields[0].as_str() {
                "schedule" => {
                    if schedule.is_some() {
                        return Err(lines.fail("duplicate schedule line"));
                    }
                    let mut deltas = Vec::new();
                    for f in &fields[1..] {
                        deltas.push(lines.parse_field::<f64>(f, "schedule level")?);
                    }
                    schedule = Some(LevelSchedule::new(deltas).map_err(CliError::Core)?);
                }
                "meta" => {
                    if fields.len() < 2 {
                        return Err(lines.fail("meta needs a key"));
                    }
                    meta.push((fields[1].clone(), fields[2..].join(" ")));
                }
                other => return Err(lines.fail(&format!("unexpected directive {other:?}"))),
            }
        }
        let graph = PlanarGraph::new(n, edges, rotation).map_err(CliError::Core)?;
        graph.validate_embedding().map_err(CliError::Core)?;
        Ok(InstanceFile { graph, schedule, meta })
    }
}

/// Serializes a rounded hierarchy: per-level component labels and cut
/// indicators. The hierarchy is re-validated before it is written, and
/// again after parsing.
pub fn save_hierarchy(graph: &PlanarGraph, hierarchy: &IntegerHierarchy) -> Result<String, CliError> {
    check_hierarchy(graph, hierarchy)?;
    let mut out = String::new();
    out.push_str(HIERARCHY_FORMAT);
    out.push('\n');
    out.push_str(&format!("vertices {}\n", graph.num_vertices()));
    out.push_str(&format!("edges {}\n", graph.num_edges()));
    out.push_str(&format!("levels {}\n", hierarchy.levels.len()));
    for (l, labels) in hierarchy.labels.iter().enumerate() {
        out.push_str(&format!("labels {}", l + 1));
        for &lab in labels {
            out.push_str(&format!(" {lab}"));
        }
        out.push('\n');
    }
    for (l, cut) in hierarchy.levels.iter().enumerate() {
        out.push_str(&format!("cut {}", l + 1));
        for &z in cut {
            out.push_str(if z { " 1" } else { " 0" });
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn load_hierarchy(
    path: &str,
    text: &str,
    graph: &PlanarGraph,
) -> Result<IntegerHierarchy, CliError> {
    let mut lines = Lines::new(path, text);
    lines.expect_header(HIERARCHY_FORMAT)?;
    let n: usize = lines.keyed_value("vertices")?;
    let m: usize = lines.keyed_value("edges")?;
    let levels: usize = lines.keyed_value("levels")?;
    if n != graph.num_vertices() || m != graph.num_edges() {
        return Err(lines.fail("hierarchy does not match the instance graph"));
    }
    let mut labels = Vec::with_capacity(levels);
    for l in 1..=levels {
        let fields = lines.keyed_rest("labels")?;
        if fields.len() != n + 1 || fields[0] != l.to_string() {
            return Err(lines.fail(&format!("expected labels for level {l}")));
        }
        let mut row = Vec::with_capacity(n);
        for f in &fields[1..] {
            row.push(lines.parse_field::<usize>(f, "component label")?);
        }
        labels.push(row);
    }
    let mut cuts = Vec::with_capacity(levels);
    for l in 1..=levels {
        let fields = lines.keyed_rest("cut")?;
        if fields.len() != m + 1 || fields[0] != l.to_string() {
            return Err(lines.fail(&format!("expected the cut of level {l}")));
        }
        let mut row = Vec::with_capacity(m);
        for f in &fields[1..] {
            row.push(match f.as_str() {
                "0" => false,
                "1" => true,
                _ => return Err(lines.fail("cut entries must be 0 or 1")),
            });
        }
        cuts.push(row);
    }
    lines.expect_end()?;
    let hierarchy = IntegerHierarchy { levels: cuts, labels };
    check_hierarchy(graph, &hierarchy)?;
    Ok(hierarchy)
}

/// Full hierarchy validation: nested multicuts, and labels that are exactly
/// the canonical components of each level's kept subgraph.
pub fn check_hierarchy(graph: &PlanarGraph, hierarchy: &IntegerHierarchy) -> Result<(), CliError> {
    validate_hierarchy(graph, &hierarchy.levels).map_err(CliError::Core)?;
    if hierarchy.labels.len() != hierarchy.levels.len() {
        return Err(CliError::Core(umr_core::Error::InvalidHierarchy(
            "labels and cuts disagree on the level count",
        )));
    }
    for (cut, labels) in hierarchy.levels.iter().zip(&hierarchy.labels) {
        let canonical = connected_components(graph, cut).map_err(CliError::Core)?;
        if labels != &canonical {
            return Err(CliError::Core(umr_core::Error::InvalidHierarchy(
                "labels are not the components of the cut",
            )));
        }
    }
    Ok(())
}

pub fn save_ultrametric(distances: &[f64]) -> String {
    let mut out = String::new();
    out.push_str(ULTRAMETRIC_FORMAT);
    out.push('\n');
    out.push_str(&format!("edges {}\n", distances.len()));
    for (e, d) in distances.iter().enumerate() {
        out.push_str(&format!("distance {e} {}\n", fmt_f64(*d)));
    }
    out
}

pub fn load_ultrametric(path: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let mut lines = Lines::new(path, text);
    lines.expect_header(ULTRAMETRIC_FORMAT)?;
    let m: usize = lines.keyed_value("edges")?;
    let mut out = Vec::with_capacity(m);
    for e in 0..m {
        let fields = lines.keyed_fields("distance", 2)?;
        if fields[0] != e.to_string() {
            return Err(lines.fail(&format!("expected the distance of edge {e}")));
        }
        out.push(lines.parse_field::<f64>(&fields[1], "distance")?);
    }
    lines.expect_end()?;
    Ok(out)
}

/// The `solve` endpoint report: bounds in layer units and in distortion
/// units (fit constant added back).
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub instance: String,
    pub status: String,
    pub iterations: usize,
    pub levels: usize,
    pub epsilon: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub residual: f64,
    pub constant: f64,
    pub distortion_lower: f64,
    pub distortion_upper: f64,
    pub lb_regressions: usize,
    /// Echo of the seed flag; the solve itself is deterministic.
    pub seed: u64,
}

pub fn save_summary(s: &Summary) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_FORMAT);
    out.push('\n');
    out.push_str(&format!("instance {}\n", s.instance));
    out.push_str(&format!("status {}\n", s.status));
    out.push_str(&format!("iterations {}\n", s.iterations));
    out.push_str(&format!("levels {}\n", s.levels));
    out.push_str(&format!("epsilon {}\n", fmt_f64(s.epsilon)));
    out.push_str(&format!("lower_bound {}\n", fmt_f64(s.lower_bound)));
    out.push_str(&format!("upper_bound {}\n", fmt_f64(s.upper_bound)));
    out.push_str(&format!("gap {}\n", fmt_f64(s.gap)));
    out.push_str(&format!("residual {}\n", fmt_f64(s.residual)));
    out.push_str(&format!("constant {}\n", fmt_f64(s.constant)));
    out.push_str(&format!("distortion_lower {}\n", fmt_f64(s.distortion_lower)));
    out.push_str(&format!("distortion_upper {}\n", fmt_f64(s.distortion_upper)));
    out.push_str(&format!("lb_regressions {}\n", s.lb_regressions));
    out.push_str(&format!("seed {}\n", s.seed));
    out
}

pub fn load_summary(path: &str, text: &str) -> Result<Summary, CliError> {
    let mut lines = Lines::new(path, text);
    lines.expect_header(SUMMARY_FORMAT)?;
    let summary = Summary {
        instance: lines.keyed_rest_joined("instance")?,
        status: lines.keyed_rest_joined("status")?,
        iterations: lines.keyed_value("iterations")?,
        levels: lines.keyed_value("levels")?,
        epsilon: lines.keyed_value("epsilon")?,
        lower_bound: lines.keyed_value("lower_bound")?,
        upper_bound: lines.keyed_value("upper_bound")?,
        gap: lines.keyed_value("gap")?,
        residual: lines.keyed_value("residual")?,
        constant: lines.keyed_value("constant")?,
        distortion_lower: lines.keyed_value("distortion_lower")?,
        distortion_upper: lines.keyed_value("distortion_upper")?,
        lb_regressions: lines.keyed_value("lb_regressions")?,
        seed: lines.keyed_value("seed")?,
    };
    lines.expect_end()?;
    Ok(summary)
}

/// The `baseline` endpoint report: fitted thresholds and costs of the
/// merge-tree reference method.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub instance: String,
    pub levels: usize,
    pub monotone_premise: bool,
    pub nested: bool,
    pub thresholds: Vec<f64>,
    pub per_level_costs: Vec<f64>,
    pub total_cost: f64,
    pub distortion_cost: f64,
}

pub fn save_baseline(r: &BaselineReport) -> String {
    let mut out = String::new();
    out.push_str(BASELINE_FORMAT);
    out.push('\n');
    out.push_str(&format!("instance {}\n", r.instance));
    out.push_str(&format!("levels {}\n", r.levels));
    out.push_str(&format!("monotone_premise {}\n", r.monotone_premise));
    out.push_str(&format!("nested {}\n", r.nested));
    for (l, (q, c)) in r.thresholds.iter().zip(&r.per_level_costs).enumerate() {
        out.push_str(&format!("level {} threshold {} cost {}\n", l + 1, fmt_f64(*q), fmt_f64(*c)));
    }
    out.push_str(&format!("total_cost {}\n", fmt_f64(r.total_cost)));
    out.push_str(&format!("distortion_cost {}\n", fmt_f64(r.distortion_cost)));
    out
}

pub fn load_baseline(path: &str, text: &str) -> Result<BaselineReport, CliError> {
    let mut lines = Lines::new(path, text);
    lines.expect_header(BASELINE_FORMAT)?;
    let instance = lines.keyed_rest_joined("instance")?;
    let levels: usize = lines.keyed_value("levels")?;
    let monotone_premise: bool = lines.keyed_value("monotone_premise")?;
    let nested: bool = lines.keyed_value("nested")?;
    let mut thresholds = Vec::with_capacity(levels);
    let mut per_level_costs = Vec::with_capacity(levels);
    for l in 1..=levels {
        let fields = lines.keyed_fields("level", 5)?;
        if fields[0] != l.to_string() || fields[1] != "threshold" || fields[3] != "cost" {
            return Err(lines.fail(&format!("expected the fit of level {l}")));
        }
        thresholds.push(lines.parse_field::<f64>(&fields[2], "threshold")?);
        per_level_costs.push(lines.parse_field::<f64>(&fields[4], "cost")?);
    }
    let total_cost = lines.keyed_value("total_cost")?;
    let distortion_cost = lines.keyed_value("distortion_cost")?;
    lines.expect_end()?;
    Ok(BaselineReport {
        instance,
        levels,
        monotone_premise,
        nested,
        thresholds,
        per_level_costs,
        total_cost,
        distortion_cost,
    })
}

/// The `ablate` endpoint report: per-level costs of the independent and
/// hierarchical solves, plus every monotonicity violation in the
/// independent stack.
#[derive(Debug, Clone, PartialEq)]
pub struct AblateReport {
    pub instance: String,
    pub levels: usize,
    pub independent_costs: Vec<f64>,
    pub hierarchical_costs: Vec<f64>,
    pub statuses: Vec<String>,
    pub violations: Vec<(usize, usize)>,
    pub nested: bool,
}

pub fn save_ablate(r: &AblateReport) -> String {
    let mut out = String::new();
    out.push_str(ABLATE_FORMAT);
    out.push('\n');
    out.push_str(&format!("instance {}\n", r.instance));
    out.push_str(&format!("levels {}\n", r.levels));
    out.push_str(&format!("nested {}\n", r.nested));
    for l in 0..r.levels {
        out.push_str(&format!(
            "level {} independent {} hierarchical {} status {}\n",
            l + 1,
            fmt_f64(r.independent_costs[l]),
            fmt_f64(r.hierarchical_costs[l]),
            r.statuses[l],
        ));
    }
    out.push_str(&format!("violations {}\n", r.violations.len()));
    for (level, edge) in &r.violations {
        out.push_str(&format!("violation {level} {edge}\n"));
    }
    out
}

/// The `oracle` endpoint report: the exhaustive optimum and its hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub instance: String,
    pub levels: usize,
    pub optimum: f64,
    pub distortion: f64,
    pub cuts: Vec<Vec<bool>>,
}

pub fn save_oracle(r: &OracleReport) -> String {
    let mut out = String::new();
    out.push_str(ORACLE_FORMAT);
    out.push('\n');
    out.push_str(&format!("instance {}\n", r.instance));
    out.push_str(&format!("levels {}\n", r.levels));
    out.push_str(&format!("optimum {}\n", fmt_f64(r.optimum)));
    out.push_str(&format!("distortion {}\n", fmt_f64(r.distortion)));
    for (l, cut) in r.cuts.iter().enumerate() {
        out.push_str(&format!("cut {}", l + 1));
        for &z in cut {
            out.push_str(if z { " 1" } else { " 0" });
        }
        out.push('\n');
    }
    out
}

pub fn load_oracle(path: &str, text: &str) -> Result<OracleReport, CliError> {
    let mut lines = Lines::new(path, text);
    lines.expect_header(ORACLE_FORMAT)?;
    let instance = lines.keyed_rest_joined("instance")?;
    let levels: usize = lines.keyed_value("levels")?;
    let optimum: f64 = lines.keyed_value("optimum")?;
    let distortion: f64 = lines.keyed_value("distortion")?;
    let mut cuts = Vec::with_capacity(levels);
    for l in 1..=levels {
        let fields = lines.keyed_rest("cut")?;
        if fields.is_empty() || fields[0] != l.to_string() {
            return Err(lines.fail(&format!("expected the cut of level {l}")));
        }
        let mut row = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            row.push(match f.as_str() {
                "0" => false,
                "1" => true,
                _ => return Err(lines.fail("cut entries must be 0 or 1")),
            });
        }
        cuts.push(row);
    }
    lines.expect_end()?;
    Ok(OracleReport { instance, levels, optimum, distortion, cuts })
}

/// Trace CSV: one row per solver iteration, pool sizes flattened into one
/// column per level.
pub fn trace_header(levels: usize) -> String {
    let mut out = String::from(
        "iter,seconds,dual_obj,residual,lb,best_ub,gap,decoded_cost,restricted_obj",
    );
    for l in 1..=levels {
        out.push_str(&format!(",pool_size_{l}"));
    }
    out
}

pub fn save_trace(rows: &[TraceRow], levels: usize) -> String {
    let mut out = trace_header(levels);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}",
            row.iteration,
            fmt_f64(row.seconds),
            fmt_f64(row.dual_objective),
            fmt_f64(row.residual),
            fmt_f64(row.lower_bound),
            fmt_f64(row.best_upper_bound),
            fmt_f64(row.gap),
            fmt_f64(row.decoded_cost),
            fmt_f64(row.restricted_objective),
        ));
        for &size in &row.pool_sizes {
            out.push_str(&format!(",{size}"));
        }
        out.push('\n');
    }
    out
}

// Line-oriented reader shared by all loaders: skips comments, tracks line
// numbers for error messages, splits on whitespace.
struct Lines<'a> {
    path: &'a str,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    current: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &'a str, text: &'a str) -> Self {
        Lines { path, iter: text.lines().enumerate(), current: 0 }
    }

    fn fail(&self, message: &str) -> CliError {
        CliError::Parse { path: self.path.to_string(), line: self.current, message: message.into() }
    }

    fn next_fields(&mut self) -> Result<Option<Vec<String>>, CliError> {
        for (idx, line) in self.iter.by_ref() {
            self.current = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some(trimmed.split_whitespace().map(str::to_string).collect()));
        }
        Ok(None)
    }

    fn expect_header(&mut self, header: &str) -> Result<(), CliError> {
        match self.next_fields()? {
            Some(fields) if fields.join(" ") == header => Ok(()),
            Some(_) => Err(self.fail(&format!("expected header {header:?}"))),
            None => Err(self.fail("empty document")),
        }
    }

    fn expect_end(&mut self) -> Result<(), CliError> {
        match self.next_fields()? {
            None => Ok(()),
            Some(_) => Err(self.fail("trailing content")),
        }
    }

    fn keyed_rest(&mut self, key: &str) -> Result<Vec<String>, CliError> {
        match self.next_fields()? {
            Some(fields) if fields[0] == key => Ok(fields[1..].to_vec()),
            Some(fields) => Err(self.fail(&format!("expected {key:?}, found {:?}", fields[0]))),
            None => Err(self.fail(&format!("expected {key:?}, found end of file"))),
        }
    }

    fn keyed_rest_joined(&mut self, key: &str) -> Result<String, CliError> {
        Ok(self.keyed_rest(key)?.join(" "))
    }

    fn keyed_fields(&mut self, key: &str, count: usize) -> Result<Vec<String>, CliError> {
        let fields = self.keyed_rest(key)?;
        if fields.len() != count {
            return Err(self.fail(&format!(
                "{key:?} takes {count} fields, found {}",
                fields.len()
            )));
        }
        Ok(fields)
    }

    fn keyed_value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        let fields = self.keyed_fields(key, 1)?;
        self.parse_field(&fields[0], key)
    }

    fn parse_field<T: std::str::FromStr>(&self, field: &str, what: &str) -> Result<T, CliError> {
        field.parse().map_err(|_| self.fail(&format!("bad {what}: {field:?}")))
    }
}
