//! File format, checks and reports shared by the `trih` binary and the
//! Python bindings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chow::{chow_dims, pairing_and_num, predicted_ih, PairingData};
use crate::compactified::canonical_compactification;
use crate::fans::{build_fan, product, FanError, TropicalFanCycle};
use crate::ihomology::{hcoh_table, ih_table, verify_subdivision, DimensionTable, IhError, Structure};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed fan-cycle file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("weights must be keyed by maximal-cone indices 0..{count}, got key {key:?}")]
    WeightKey { key: String, count: usize },
    #[error("lattice rank {rank} exceeds --max-dim {max}")]
    TooLarge { rank: usize, max: usize },
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// On-disk fan cycle: `{rank, rays, cones, weights}` with weights keyed by
/// the index of the maximal cone as a string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanCycleFile {
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub cones: Vec<Vec<usize>>,
    pub weights: BTreeMap<String, i64>,
}

impl FanCycleFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let f: FanCycleFile = serde_json::from_str(text)?;
        f.weight_vector()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<(Self, String), InputError> {
        let text = std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.display().to_string(), source })?;
        let f = FanCycleFile::parse(&text)?;
        Ok((f, digest(text.as_bytes())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn from_cycle(c: &TropicalFanCycle) -> Self {
        let fan = c.fan();
        FanCycleFile {
            rank: fan.rank(),
            rays: fan.rays().to_vec(),
            cones: fan.maximal_cones().iter().map(|&m| fan.cone(m).to_vec()).collect(),
            weights: c.weights().iter().enumerate().map(|(i, &w)| (i.to_string(), w)).collect(),
        }
    }

    fn weight_vector(&self) -> Result<Vec<i64>, InputError> {
        let count = self.cones.len();
        let mut w = vec![None; count];
        for (k, &v) in &self.weights {
            let i: usize = k.parse().ok().filter(|&i: &usize| i < count && i.to_string() == *k).ok_or_else(|| InputError::WeightKey { key: k.clone(), count })?;
            w[i] = Some(v);
        }
        w.iter()
            .enumerate()
            .map(|(i, x)| x.ok_or_else(|| InputError::WeightKey { key: format!("missing {i}"), count }))
            .collect()
    }

    pub fn to_cycle(&self) -> Result<TropicalFanCycle, InputError> {
        let fan = build_fan(self.rank, self.rays.clone(), self.cones.clone())?;
        Ok(TropicalFanCycle::new(fan, self.weight_vector()?)?)
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let h = Sha256::digest(bytes);
    h.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub details: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, details: impl Into<String>) -> Self {
        Check { name: name.to_string(), status: if pass { Status::Pass } else { Status::Fail }, details: details.into() }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub input_digest: String,
    pub tables: BTreeMap<String, BTreeMap<String, usize>>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairings: Option<Vec<PairingData>>,
}

impl Report {
    fn new(command: &str, input_digest: &str) -> Self {
        Report { command: command.to_string(), input_digest: input_digest.to_string(), tables: BTreeMap::new(), checks: Vec::new(), pairings: None }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn add_table(&mut self, name: &str, t: &DimensionTable) {
        self.tables.insert(name.to_string(), t.to_keyed());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} ({})\n", self.command, &self.input_digest[..self.input_digest.len().min(12)]);
        for (name, t) in &self.tables {
            s.push_str(&format!("{name}:\n"));
            let d = (t.len() as f64).sqrt() as usize;
            for p in (0..d).rev() {
                let row: Vec<String> = (0..d).map(|q| t.get(&format!("{p},{q}")).copied().unwrap_or(0).to_string()).collect();
                s.push_str(&format!("  p={p}: {}\n", row.join(" ")));
            }
        }
        if let Some(ps) = &self.pairings {
            for pd in ps {
                s.push_str(&format!("pairing p={}: rank {} of {}x{}\n", pd.p, pd.rank, pd.dim_left, pd.dim_right));
                for row in &pd.matrix {
                    s.push_str(&format!("  [{}]\n", row.join(", ")));
                }
            }
        }
        for c in &self.checks {
            let st = if c.passed() { "pass" } else { "FAIL" };
            s.push_str(&format!("[{st}] {}: {}\n", c.name, c.details));
        }
        s
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub structure: Structure,
    pub geometric: bool,
    pub max_dim: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { structure: Structure::Barycentric, geometric: false, max_dim: 4 }
    }
}

fn guard(f: &FanCycleFile, opts: &Options) -> Result<(), InputError> {
    if f.rank > opts.max_dim {
        return Err(InputError::TooLarge { rank: f.rank, max: opts.max_dim });
    }
    Ok(())
}

/// Validity checks; the cycle is returned when all of them pass.
pub fn validate(f: &FanCycleFile, opts: &Options) -> (Vec<Check>, Option<TropicalFanCycle>) {
    let mut checks = Vec::new();
    let fan = match build_fan(f.rank, f.rays.clone(), f.cones.clone()) {
        Ok(fan) => {
            checks.push(Check::new("fan", true, format!("{} rays, {} maximal cones, unimodular", fan.rays().len(), fan.maximal_cones().len())));
            fan
        }
        Err(e) => {
            checks.push(Check::new("fan", false, e.to_string()));
            return (checks, None);
        }
    };
    if opts.geometric {
        match fan.check_geometric() {
            Ok(()) => checks.push(Check::new("geometric", true, "cones meet along common faces")),
            Err(e) => {
                checks.push(Check::new("geometric", false, e.to_string()));
                return (checks, None);
            }
        }
    }
    let pure = fan.is_pure();
    checks.push(Check::new("pure", pure, format!("dimension {}", fan.dim())));
    if !pure {
        return (checks, None);
    }
    let cycle = match f.weight_vector().map_err(|e| e.to_string()).and_then(|w| TropicalFanCycle::new(fan, w).map_err(|e| e.to_string())) {
        Ok(c) => {
            checks.push(Check::new("weights", true, "positive, one per maximal cone"));
            c
        }
        Err(e) => {
            checks.push(Check::new("weights", false, e));
            return (checks, None);
        }
    };
    let b = cycle.is_balanced();
    let details = if b.balanced {
        "balanced at every codimension-one cone".to_string()
    } else {
        let cones: Vec<String> = b
            .violations
            .iter()
            .map(|&c| match cycle.fan().cone(c) {
                [] => "origin".to_string(),
                rays => format!("cone {rays:?}"),
            })
            .collect();
        format!("balancing fails at {}", cones.join(", "))
    };
    checks.push(Check::new("balancing", b.balanced, details));
    if !b.balanced {
        return (checks, None);
    }
    let x = canonical_compactification(&cycle);
    let reg = x.is_regular_at_infinity();
    checks.push(Check::new("regular_at_infinity", reg, format!("{} cells", x.len())));
    (checks, reg.then_some(cycle))
}

fn internal(e: IhError) -> Check {
    Check::new("internal", false, e.to_string())
}

pub fn cmd_check(f: &FanCycleFile, digest: &str, opts: &Options) -> Result<Report, InputError> {
    guard(f, opts)?;
    let mut r = Report::new("check", digest);
    r.checks = validate(f, opts).0;
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Chow,
    Hcoh,
    Ih,
}

pub fn cmd_tables(f: &FanCycleFile, digest: &str, which: Which, opts: &Options) -> Result<Report, InputError> {
    guard(f, opts)?;
    let name = match which {
        Which::Chow => "chow",
        Which::Hcoh => "hcoh",
        Which::Ih => "ih",
    };
    let mut r = Report::new(name, digest);
    let (checks, cycle) = validate(f, opts);
    r.checks = checks;
    let Some(c) = cycle else {
        return Ok(r);
    };
    match which {
        Which::Chow => {
            let dims = chow_dims(c.fan());
            r.add_table("chow", &DimensionTable::diagonal(&dims));
            match predicted_ih(&c) {
                Ok(t) => r.add_table("chow_mod_num", &t),
                Err(e) => r.checks.push(Check::new("pairing", false, e.to_string())),
            }
            let ps: Result<Vec<PairingData>, _> = (0..=c.dim()).map(|p| pairing_and_num(&c, p)).collect();
            match ps {
                Ok(ps) => r.pairings = Some(ps),
                Err(e) => r.checks.push(Check::new("pairing", false, e.to_string())),
            }
        }
        Which::Hcoh => {
            let x = canonical_compactification(&c);
            match hcoh_table(&x, Structure::Native) {
                Ok(t) => r.add_table("hcoh", &t),
                Err(e) => r.checks.push(internal(e)),
            }
        }
        Which::Ih => {
            let x = canonical_compactification(&c);
            match ih_table(&x, opts.structure) {
                Ok(t) => r.add_table("ih", &t),
                Err(e) => r.checks.push(internal(e)),
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifySelection {
    pub theorem61: bool,
    pub duality: bool,
    pub subdivision: bool,
}

impl VerifySelection {
    pub fn all() -> Self {
        VerifySelection { theorem61: true, duality: true, subdivision: true }
    }
}

fn diff_details(a: &str, b: &str, diff: Option<(usize, usize, usize, usize)>) -> String {
    match diff {
        None => format!("{a} and {b} agree"),
        Some((p, q, x, y)) => format!("first difference at ({p},{q}): {a}={x}, {b}={y}"),
    }
}

pub fn cmd_verify(
    f: &FanCycleFile,
    digest: &str,
    sel: VerifySelection,
    kunneth: Option<&FanCycleFile>,
    opts: &Options,
) -> Result<Report, InputError> {
    guard(f, opts)?;
    if let Some(g) = kunneth {
        guard(g, opts)?;
        if f.rank + g.rank > opts.max_dim {
            return Err(InputError::TooLarge { rank: f.rank + g.rank, max: opts.max_dim });
        }
    }
    let mut r = Report::new("verify", digest);
    let (checks, cycle) = validate(f, opts);
    r.checks = checks;
    let Some(c) = cycle else {
        return Ok(r);
    };
    let x = canonical_compactification(&c);
    let ih = match ih_table(&x, opts.structure) {
        Ok(t) => t,
        Err(e) => {
            r.checks.push(internal(e));
            return Ok(r);
        }
    };
    r.add_table("ih", &ih);
    if sel.theorem61 {
        match predicted_ih(&c) {
            Ok(pred) => {
                r.add_table("chow_mod_num", &pred);
                let diff = ih.first_difference(&pred);
                r.checks.push(Check::new("theorem61", diff.is_none() && ih.off_diagonal_zero(), diff_details("ih", "chow_mod_num", diff)));
            }
            Err(e) => r.checks.push(Check::new("theorem61", false, e.to_string())),
        }
    }
    if sel.duality {
        let d = ih.duality_defect();
        let details = match d {
            None => "IH^{p,q} = IH^{d-p,d-q} for all (p,q)".to_string(),
            Some((p, q)) => format!("IH^{{{p},{q}}} differs from its dual entry"),
        };
        r.checks.push(Check::new("duality", d.is_none(), details));
    }
    if sel.subdivision {
        match verify_subdivision(&x) {
            Ok(cmp) => {
                r.add_table("ih_native", &cmp.left);
                r.checks.push(Check::new("subdivision", cmp.agree(), diff_details("native", "barycentric", cmp.first_difference)));
            }
            Err(e) => r.checks.push(internal(e)),
        }
    }
    if let Some(g) = kunneth {
        let (gchecks, gcycle) = validate(g, opts);
        for mut ch in gchecks.into_iter().filter(|c| !c.passed()) {
            ch.name = format!("kunneth_factor_{}", ch.name);
            r.checks.push(ch);
        }
        if let Some(gc) = gcycle {
            let y = canonical_compactification(&gc);
            let prod = canonical_compactification(&product(&c, &gc));
            match (ih_table(&y, opts.structure), ih_table(&prod, opts.structure)) {
                (Ok(ty), Ok(tp)) => {
                    let conv = ih.convolve(&ty);
                    r.add_table("ih_product", &tp);
                    r.add_table("ih_convolution", &conv);
                    let diff = tp.first_difference(&conv);
                    r.checks.push(Check::new("kunneth", diff.is_none(), diff_details("product", "convolution", diff)));
                }
                (Err(e), _) | (_, Err(e)) => r.checks.push(internal(e)),
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"rank":2,"rays":[[1,0],[0,1],[-1,-1]],"cones":[[0],[1],[2]],"weights":{"0":1,"1":1,"2":1}}"#;

    #[test]
    fn parse_and_round_trip() {
        let f = FanCycleFile::parse(LINE).unwrap();
        assert_eq!(FanCycleFile::parse(&f.to_json()).unwrap(), f);
        let c = f.to_cycle().unwrap();
        assert_eq!(FanCycleFile::from_cycle(&c), f);
        assert!(FanCycleFile::parse(r#"{"rank":1}"#).is_err());
        let extra = LINE.replace("\"rank\":2", "\"rank\":2,\"name\":\"x\"");
        assert!(matches!(FanCycleFile::parse(&extra), Err(InputError::Parse(_))));
        let badkey = LINE.replace("\"2\":1", "\"7\":1");
        assert!(matches!(FanCycleFile::parse(&badkey), Err(InputError::WeightKey { .. })));
    }

    #[test]
    fn check_reports() {
        let f = FanCycleFile::parse(LINE).unwrap();
        let r = cmd_check(&f, &digest(LINE.as_bytes()), &Options::default()).unwrap();
        assert!(r.passed(), "{}", r.render());
        let bad = FanCycleFile::parse(&LINE.replace("\"2\":1", "\"2\":2")).unwrap();
        let r = cmd_check(&bad, "", &Options::default()).unwrap();
        assert_eq!(r.exit_code(), 1);
        let b = r.checks.iter().find(|c| c.name == "balancing").unwrap();
        assert!(b.details.contains("origin"), "{}", b.details);
        let opts = Options { max_dim: 1, ..Options::default() };
        assert!(matches!(cmd_check(&f, "", &opts), Err(InputError::TooLarge { .. })));
    }

    #[test]
    fn tables_and_verify() {
        let f = FanCycleFile::parse(LINE).unwrap();
        let r = cmd_tables(&f, "", Which::Ih, &Options::default()).unwrap();
        assert_eq!(r.tables["ih"]["0,0"], 1);
        assert_eq!(r.tables["ih"]["1,1"], 1);
        assert_eq!(r.tables["ih"]["0,1"], 0);
        let r = cmd_verify(&f, "", VerifySelection::all(), Some(&f), &Options::default()).unwrap();
        assert!(r.passed(), "{}", r.render());
        assert_eq!(r.to_json(), cmd_verify(&f, "", VerifySelection::all(), Some(&f), &Options::default()).unwrap().to_json());
    }
}
