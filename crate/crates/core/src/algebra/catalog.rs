//! Catalog and errata files.
//!
//! Catalog: a JSON array of
//! `{"name", "dim", "params": [{"name", "admissible"}], "entries": [[i, j, k, "expr"], ...]}`
//! with 1-based indices; omitted constants are zero.
//!
//! Errata: a JSON array of
//! `{"algebra", "issue", "failing": [[i, j, k], ...], "readings": [{"label", "default", "entries", "extra_params"?}]}`.
//! The reading marked `default` replaces the catalog table when errata are applied.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::table::{parse_entries, Admissible, AlgebraTable, ParamSpec};
use crate::arith::Param;
use crate::error::{Error, Result};

/// Environment variable that overrides the data directory.
pub const DATA_DIR_ENV: &str = "LEIBNIZ_DATA_DIR";

/// `$LEIBNIZ_DATA_DIR`, else the `data/` directory shipped with the workspace.
pub fn default_data_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        return PathBuf::from(dir);
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[derive(Clone, Debug)]
pub struct Catalog {
    tables: Vec<AlgebraTable>,
}

impl Catalog {
    pub fn new(tables: Vec<AlgebraTable>) -> Self {
        Catalog { tables }
    }

    pub fn tables(&self) -> &[AlgebraTable] {
        &self.tables
    }

    pub fn names(&self) -> Vec<&str> {
        self.tables.iter().map(AlgebraTable::name).collect()
    }

    pub fn get(&self, name: &str) -> Result<&AlgebraTable> {
        self.tables
            .iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::UnknownAlgebra(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tables.iter().any(|t| t.name() == name)
    }

    /// Replace every table that has errata with its default reading.
    pub fn apply_errata(&self, errata: &[ErrataEntry]) -> Result<Catalog> {
        let mut tables = self.tables.clone();
        for entry in errata {
            let reading = entry.default_reading()?;
            let slot = tables
                .iter_mut()
                .find(|t| t.name() == entry.algebra)
                .ok_or_else(|| Error::UnknownAlgebra(entry.algebra.clone()))?;
            *slot = reading.table.clone();
        }
        Ok(Catalog { tables })
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::schema("", "empty document"));
    }
    serde_json::from_str(&text).map_err(|e| Error::schema("", e.to_string()))
}

fn str_field<'a>(obj: &'a Value, key: &str, pointer: &str) -> Result<&'a str> {
    obj.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::schema(format!("{pointer}/{key}"), "expected a string"))
}

fn array_field<'a>(obj: &'a Value, key: &str, pointer: &str) -> Result<&'a [Value]> {
    obj.get(key)
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::schema(format!("{pointer}/{key}"), "expected an array"))
}

fn parse_params(rows: &[Value], pointer: &str) -> Result<Vec<ParamSpec>> {
    let mut out: Vec<ParamSpec> = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let here = format!("{pointer}/{idx}");
        let name = str_field(row, "name", &here)?;
        if name.is_empty()
            || name == "i"
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(Error::schema(
                format!("{here}/name"),
                "invalid parameter name",
            ));
        }
        let admissible = Admissible::parse(str_field(row, "admissible", &here)?)
            .map_err(|e| Error::schema(format!("{here}/admissible"), e.to_string()))?;
        if out.iter().any(|p| p.param.name() == name) {
            return Err(Error::schema(format!("{here}/name"), "duplicate parameter"));
        }
        out.push(ParamSpec {
            param: Param::new(name),
            admissible,
        });
    }
    Ok(out)
}

fn build_table(
    name: &str,
    dim: usize,
    params: Vec<ParamSpec>,
    entries: &[Value],
    pointer: &str,
) -> Result<AlgebraTable> {
    let parsed = parse_entries(entries, dim, &format!("{pointer}/entries"))?;
    let declared: BTreeSet<&Param> = params.iter().map(|p| &p.param).collect();
    for (idx, (_, _, _, v)) in parsed.iter().enumerate() {
        if let Some(p) = v.params().iter().find(|p| !declared.contains(p)) {
            return Err(Error::schema(
                format!("{pointer}/entries/{idx}/3"),
                format!("undeclared parameter `{p}`"),
            ));
        }
    }
    Ok(AlgebraTable::from_entries(name, dim, params, parsed))
}

/// Parse catalog JSON text.
pub fn parse_catalog(value: &Value) -> Result<Catalog> {
    let items = value
        .as_array()
        .ok_or_else(|| Error::schema("", "catalog must be a JSON array"))?;
    if items.is_empty() {
        return Err(Error::schema("", "catalog is empty"));
    }
    let mut tables: Vec<AlgebraTable> = Vec::with_capacity(items.len());
    for (idx, item) in items.iter().enumerate() {
        let here = format!("/{idx}");
        let name = str_field(item, "name", &here)?;
        if tables.iter().any(|t| t.name() == name) {
            return Err(Error::schema(
                format!("{here}/name"),
                "duplicate algebra name",
            ));
        }
        let dim = item
            .get("dim")
            .and_then(Value::as_u64)
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::schema(format!("{here}/dim"), "expected a positive integer"))?
            as usize;
        let params = parse_params(
            array_field(item, "params", &here)?,
            &format!("{here}/params"),
        )?;
        let entries = array_field(item, "entries", &here)?;
        tables.push(build_table(name, dim, params, entries, &here)?);
    }
    Ok(Catalog { tables })
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog> {
    parse_catalog(&read_json(path.as_ref())?)
}

#[derive(Clone, Debug)]
pub struct Reading {
    pub label: String,
    pub default: bool,
    pub table: AlgebraTable,
}

#[derive(Clone, Debug)]
pub struct ErrataEntry {
    pub algebra: String,
    pub issue: String,
    /// 1-based `(x, y, z)` triples at which the literal reading fails.
    pub failing: Vec<[usize; 3]>,
    pub readings: Vec<Reading>,
}

impl ErrataEntry {
    pub fn default_reading(&self) -> Result<&Reading> {
        let mut defaults = self.readings.iter().filter(|r| r.default);
        match (defaults.next(), defaults.next()) {
            (Some(r), None) => Ok(r),
            _ => Err(Error::schema(
                format!("/{}", self.algebra),
                "exactly one reading must be marked default",
            )),
        }
    }

    pub fn reading(&self, label: &str) -> Option<&Reading> {
        self.readings.iter().find(|r| r.label == label)
    }
}

/// Parse errata against the literal catalog (dimensions and parameters are
/// inherited from the catalog entry).
pub fn parse_errata(value: &Value, catalog: &Catalog) -> Result<Vec<ErrataEntry>> {
    let items = value
        .as_array()
        .ok_or_else(|| Error::schema("", "errata must be a JSON array"))?;
    let mut out = Vec::with_capacity(items.len());
    for (idx, item) in items.iter().enumerate() {
        let here = format!("/{idx}");
        let algebra = str_field(item, "algebra", &here)?;
        let base = catalog
            .get(algebra)
            .map_err(|_| Error::schema(format!("{here}/algebra"), "unknown algebra"))?;
        let issue = str_field(item, "issue", &here)?.to_string();
        let mut failing = Vec::new();
        for (f, triple) in array_field(item, "failing", &here)?.iter().enumerate() {
            let t: Vec<usize> = triple
                .as_array()
                .map(|a| {
                    a.iter()
                        .filter_map(Value::as_u64)
                        .map(|x| x as usize)
                        .collect()
                })
                .unwrap_or_default();
            if t.len() != 3 || t.iter().any(|&x| x < 1 || x > base.dim()) {
                return Err(Error::schema(
                    format!("{here}/failing/{f}"),
                    "expected [x, y, z]",
                ));
            }
            failing.push([t[0], t[1], t[2]]);
        }
        let mut readings = Vec::new();
        for (r, reading) in array_field(item, "readings", &here)?.iter().enumerate() {
            let rp = format!("{here}/readings/{r}");
            let label = str_field(reading, "label", &rp)?.to_string();
            let default = reading
                .get("default")
                .and_then(Value::as_bool)
                .ok_or_else(|| Error::schema(format!("{rp}/default"), "expected a boolean"))?;
            let mut params = base.params().to_vec();
            if let Some(extra) = reading.get("extra_params") {
                let extra = extra.as_array().ok_or_else(|| {
                    Error::schema(format!("{rp}/extra_params"), "expected an array")
                })?;
                params.extend(parse_params(extra, &format!("{rp}/extra_params"))?);
            }
            let entries = array_field(reading, "entries", &rp)?;
            let table = build_table(algebra, base.dim(), params, entries, &rp)?;
            readings.push(Reading {
                label,
                default,
                table,
            });
        }
        let entry = ErrataEntry {
            algebra: algebra.to_string(),
            issue,
            failing,
            readings,
        };
        entry.default_reading()?;
        out.push(entry);
    }
    Ok(out)
}

pub fn load_errata(path: impl AsRef<Path>, catalog: &Catalog) -> Result<Vec<ErrataEntry>> {
    parse_errata(&read_json(path.as_ref())?, catalog)
}

/// The shipped data: literal catalog, errata, and the catalog with the
/// default errata readings applied.
#[derive(Clone, Debug)]
pub struct DataSet {
    pub dir: PathBuf,
    pub literal: Catalog,
    pub errata: Vec<ErrataEntry>,
    pub resolved: Catalog,
}

impl DataSet {
    pub fn load(dir: impl AsRef<Path>) -> Result<DataSet> {
        let dir = dir.as_ref().to_path_buf();
        let literal = load_catalog(dir.join("catalog.json"))?;
        let errata = load_errata(dir.join("errata.json"), &literal)?;
        let resolved = literal.apply_errata(&errata)?;
        Ok(DataSet {
            dir,
            literal,
            errata,
            resolved,
        })
    }

    pub fn errata_for(&self, name: &str) -> Option<&ErrataEntry> {
        self.errata.iter().find(|e| e.algebra == name)
    }

    pub fn families_dir(&self) -> PathBuf {
        self.dir.join("families")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_catalog_is_rejected() {
        assert!(matches!(
            parse_catalog(&json!([])),
            Err(Error::Schema { .. })
        ));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(load_catalog(&p), Err(Error::Schema { .. })));
    }

    #[test]
    fn schema_errors_point_at_entry() {
        let bad = json!([
            {"name": "A", "dim": 2, "params": [], "entries": [[1, 1, 2, "1"]]},
            {"name": "B", "dim": 2, "params": [], "entries": [[1, 3, 1, "1"]]}
        ]);
        match parse_catalog(&bad) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/1/entries/0/1"),
            other => panic!("{other:?}"),
        }
        let undeclared =
            json!([{"name": "A", "dim": 2, "params": [], "entries": [[1, 1, 2, "mu"]]}]);
        match parse_catalog(&undeclared) {
            Err(Error::Schema { pointer, message }) => {
                assert_eq!(pointer, "/0/entries/0/3");
                assert!(message.contains("mu"));
            }
            other => panic!("{other:?}"),
        }
        let syntax = json!([{"name": "A", "dim": 2, "params": [], "entries": [[1, 1, 2, "1 +"]]}]);
        assert!(matches!(parse_catalog(&syntax), Err(Error::Schema { .. })));
    }

    #[test]
    fn errata_replace_default_reading() {
        let cat = parse_catalog(&json!([
            {"name": "A", "dim": 2, "params": [], "entries": [[1, 1, 1, "1"]]}
        ]))
        .unwrap();
        let errata = parse_errata(
            &json!([{
                "algebra": "A", "issue": "x", "failing": [[1, 1, 1]],
                "readings": [
                    {"label": "literal", "default": false, "entries": [[1, 1, 1, "1"]]},
                    {"label": "fixed", "default": true, "entries": [[1, 1, 2, "1"]]}
                ]
            }]),
            &cat,
        )
        .unwrap();
        let fixed = cat.apply_errata(&errata).unwrap();
        assert!(fixed.get("A").unwrap().get(0, 0, 0).is_zero_expr());
        assert_eq!(errata[0].failing, vec![[1, 1, 1]]);
    }

    trait ZeroExpr {
        fn is_zero_expr(&self) -> bool;
    }

    impl ZeroExpr for crate::arith::RatExpr {
        fn is_zero_expr(&self) -> bool {
            num_traits::Zero::is_zero(self)
        }
    }
}

#[cfg(test)]
mod shipped {
    use super::*;
    use crate::algebra::first_leibniz_failure;

    #[test]
    fn shipped_data_loads_and_resolves() {
        let data = DataSet::load(default_data_dir()).unwrap();
        assert_eq!(data.literal.tables().len(), 21);
        for t in data.resolved.tables() {
            assert!(first_leibniz_failure(t).is_none(), "{}", t.name());
        }
        let l4 = data.literal.get("L4").unwrap();
        let ((x, y, z), _) = first_leibniz_failure(l4).unwrap();
        assert_eq!((x + 1, y + 1, z + 1), (1, 1, 2));
    }
}
