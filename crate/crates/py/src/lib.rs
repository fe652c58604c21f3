//! Python bindings: fan cycles in, dimension tables and reports out.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use trih_core::commands::{cmd_check, cmd_tables, cmd_verify, digest, FanCycleFile, InputError, Options, Report, VerifySelection, Which};
use trih_core::fans;
use trih_core::ihomology::Structure;

type Table = BTreeMap<(usize, usize), usize>;

fn err(e: InputError) -> PyErr {
    match e {
        InputError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn options(structure: &str, max_dim: usize) -> PyResult<Options> {
    let structure = match structure {
        "native" => Structure::Native,
        "barycentric" => Structure::Barycentric,
        other => return Err(PyValueError::new_err(format!("unknown structure {other:?}"))),
    };
    Ok(Options { structure, max_dim, ..Options::default() })
}

fn keyed(t: &BTreeMap<String, usize>) -> Table {
    t.iter()
        .map(|(k, &v)| {
            let (p, q) = k.split_once(',').expect("keys are \"p,q\"");
            ((p.parse().unwrap(), q.parse().unwrap()), v)
        })
        .collect()
}

#[pyclass(name = "FanCycle", frozen, module = "pytrih")]
struct PyFanCycle {
    file: FanCycleFile,
    digest: String,
}

impl PyFanCycle {
    fn wrap(file: FanCycleFile) -> PyResult<Self> {
        file.to_cycle().map_err(err)?;
        let digest = digest(file.to_json().as_bytes());
        Ok(PyFanCycle { file, digest })
    }

    fn table(&self, which: Which, name: &str, structure: &str, max_dim: usize) -> PyResult<Table> {
        let r = cmd_tables(&self.file, &self.digest, which, &options(structure, max_dim)?).map_err(err)?;
        match r.tables.get(name) {
            Some(t) => Ok(keyed(t)),
            None => Err(PyValueError::new_err(failures(&r))),
        }
    }
}

fn failures(r: &Report) -> String {
    let msgs: Vec<String> = r.checks.iter().filter(|c| !c.passed()).map(|c| format!("{}: {}", c.name, c.details)).collect();
    format!("invalid fan cycle ({})", msgs.join("; "))
}

#[pymethods]
impl PyFanCycle {
    /// Weights are listed in the order of `cones`.
    #[new]
    fn new(rank: usize, rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>, weights: Vec<i64>) -> PyResult<Self> {
        let weights = weights.into_iter().enumerate().map(|(i, w)| (i.to_string(), w)).collect();
        Self::wrap(FanCycleFile { rank, rays, cones, weights })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::wrap(FanCycleFile::parse(text).map_err(err)?)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (file, digest) = FanCycleFile::read(&path).map_err(err)?;
        file.to_cycle().map_err(err)?;
        Ok(PyFanCycle { file, digest })
    }

    fn to_json(&self) -> String {
        self.file.to_json()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.file.rank
    }

    #[getter]
    fn digest(&self) -> &str {
        &self.digest
    }

    fn product(&self, other: &PyFanCycle) -> PyResult<Self> {
        let a = self.file.to_cycle().map_err(err)?;
        let b = other.file.to_cycle().map_err(err)?;
        Self::wrap(FanCycleFile::from_cycle(&fans::product(&a, &b)))
    }

    #[pyo3(signature = (max_dim = 4))]
    fn check(&self, max_dim: usize) -> PyResult<PyReport> {
        Ok(PyReport(cmd_check(&self.file, &self.digest, &options("barycentric", max_dim)?).map_err(err)?))
    }

    /// `{(p, q): dim IH^{p,q}}`.
    #[pyo3(signature = (structure = "barycentric", max_dim = 4))]
    fn ih(&self, structure: &str, max_dim: usize) -> PyResult<Table> {
        self.table(Which::Ih, "ih", structure, max_dim)
    }

    /// `{(p, q): dim H^{p,q}}`.
    #[pyo3(signature = (max_dim = 4))]
    fn hcoh(&self, max_dim: usize) -> PyResult<Table> {
        self.table(Which::Hcoh, "hcoh", "native", max_dim)
    }

    /// `{(p, p): dim CH^p}`.
    #[pyo3(signature = (max_dim = 4))]
    fn chow(&self, max_dim: usize) -> PyResult<Table> {
        self.table(Which::Chow, "chow", "barycentric", max_dim)
    }

    /// Full chow report including pairing matrices.
    #[pyo3(signature = (max_dim = 4))]
    fn chow_report(&self, max_dim: usize) -> PyResult<PyReport> {
        Ok(PyReport(cmd_tables(&self.file, &self.digest, Which::Chow, &options("barycentric", max_dim)?).map_err(err)?))
    }

    /// Runs every check; `kunneth` adds the product comparison.
    #[pyo3(signature = (kunneth = None, structure = "barycentric", max_dim = 4))]
    fn verify(&self, kunneth: Option<&PyFanCycle>, structure: &str, max_dim: usize) -> PyResult<PyReport> {
        let r = cmd_verify(&self.file, &self.digest, VerifySelection::all(), kunneth.map(|k| &k.file), &options(structure, max_dim)?).map_err(err)?;
        Ok(PyReport(r))
    }

    fn __repr__(&self) -> String {
        format!("FanCycle(rank={}, rays={}, cones={})", self.file.rank, self.file.rays.len(), self.file.cones.len())
    }
}

#[pyclass(name = "Report", frozen, module = "pytrih")]
struct PyReport(Report);

#[pymethods]
impl PyReport {
    #[getter]
    fn command(&self) -> &str {
        &self.0.command
    }

    #[getter]
    fn passed(&self) -> bool {
        self.0.passed()
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        self.0.exit_code()
    }

    #[getter]
    fn tables(&self) -> BTreeMap<String, Table> {
        self.0.tables.iter().map(|(k, t)| (k.clone(), keyed(t))).collect()
    }

    /// `[(name, passed, details)]`.
    #[getter]
    fn checks(&self) -> Vec<(String, bool, String)> {
        self.0.checks.iter().map(|c| (c.name.clone(), c.passed(), c.details.clone())).collect()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn render(&self) -> String {
        self.0.render()
    }

    fn __repr__(&self) -> String {
        format!("Report(command={:?}, passed={})", self.0.command, self.0.passed())
    }
}

#[pymodule]
fn pytrih(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFanCycle>()?;
    m.add_class::<PyReport>()?;
    Ok(())
}
