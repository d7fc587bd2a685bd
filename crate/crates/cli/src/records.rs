//! Versioned CSV tables. Line 1 holds the schema id, line 2 the column
//! names; floats use the shortest representation that parses back to the
//! same bits, and absent values are written as `null`.

use std::io::Write;

use crate::error::{CliError, CliResult};

pub const RESULT_SCHEMA: &str = "catforge-results/1";
pub const NULL: &str = "null";

pub const RESULT_COLUMNS: [&str; 16] = [
    "scenario",
    "g_mag",
    "alpha_sq",
    "k",
    "t",
    "delta_g",
    "probability",
    "negativity",
    "fidelity",
    "beta_mag",
    "phi",
    "metrological_power",
    "var_x",
    "s_even",
    "s_odd",
    "lifetime",
];

/// One output row: echoed inputs plus the scalars the scenario computed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultRecord {
    pub scenario: String,
    pub g_mag: Option<f64>,
    pub alpha_sq: Option<f64>,
    pub k: Option<i64>,
    /// Evolution time in μs.
    pub t: Option<f64>,
    pub delta_g: Option<f64>,
    pub probability: Option<f64>,
    pub negativity: Option<f64>,
    pub fidelity: Option<f64>,
    pub beta_mag: Option<f64>,
    /// Cat phase in radians.
    pub phi: Option<f64>,
    pub metrological_power: Option<f64>,
    pub var_x: Option<f64>,
    pub s_even: Option<f64>,
    pub s_odd: Option<f64>,
    /// δ-extinction time in μs.
    pub lifetime: Option<f64>,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NULL.to_string(), fmt_f64)
}

fn parse_opt(field: &str, column: &str) -> CliResult<Option<f64>> {
    if field == NULL {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| CliError::config(column, format!("not a number: `{field}`")))
}

impl ResultRecord {
    pub fn new(scenario: &str, g_mag: f64, alpha_sq: f64, k: i64) -> Self {
        ResultRecord {
            scenario: scenario.to_string(),
            g_mag: Some(g_mag),
            alpha_sq: Some(alpha_sq),
            k: Some(k),
            ..ResultRecord::default()
        }
    }

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            fmt_opt(self.g_mag),
            fmt_opt(self.alpha_sq),
            self.k.map_or_else(|| NULL.to_string(), |k| k.to_string()),
            fmt_opt(self.t),
            fmt_opt(self.delta_g),
            fmt_opt(self.probability),
            fmt_opt(self.negativity),
            fmt_opt(self.fidelity),
            fmt_opt(self.beta_mag),
            fmt_opt(self.phi),
            fmt_opt(self.metrological_power),
            fmt_opt(self.var_x),
            fmt_opt(self.s_even),
            fmt_opt(self.s_odd),
            fmt_opt(self.lifetime),
        ]
    }

    pub fn from_fields(f: &[&str]) -> CliResult<Self> {
        if f.len() != RESULT_COLUMNS.len() {
            return Err(CliError::config(
                "row",
                format!("expected {} fields, got {}", RESULT_COLUMNS.len(), f.len()),
            ));
        }
        let c = |i: usize| parse_opt(f[i], RESULT_COLUMNS[i]);
        let k = if f[3] == NULL {
            None
        } else {
            Some(
                f[3].parse()
                    .map_err(|_| CliError::config("k", format!("not an integer: `{}`", f[3])))?,
            )
        };
        Ok(ResultRecord {
            scenario: f[0].to_string(),
            g_mag: c(1)?,
            alpha_sq: c(2)?,
            k,
            t: c(4)?,
            delta_g: c(5)?,
            probability: c(6)?,
            negativity: c(7)?,
            fidelity: c(8)?,
            beta_mag: c(9)?,
            phi: c(10)?,
            metrological_power: c(11)?,
            var_x: c(12)?,
            s_even: c(13)?,
            s_odd: c(14)?,
            lifetime: c(15)?,
        })
    }
}

/// A table under construction: schema id, header and rows of text fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        Table {
            schema: schema.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn results(records: &[ResultRecord]) -> Self {
        let mut t = Table::new(RESULT_SCHEMA, &RESULT_COLUMNS);
        for r in records {
            t.push(r.fields());
        }
        t
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let write = |w: &mut csv::Writer<Vec<u8>>, rec: &[String]| {
            w.write_record(rec).expect("writing to memory cannot fail");
        };
        write(&mut w, std::slice::from_ref(&self.schema));
        write(&mut w, &self.columns);
        for r in &self.rows {
            write(&mut w, r);
        }
        w.into_inner().expect("flushing to memory cannot fail")
    }

    pub fn parse(bytes: &[u8]) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(bytes);
        let mut records = rdr.records();
        let mut next = |what: &str| -> CliResult<Vec<String>> {
            match records.next() {
                Some(Ok(r)) => Ok(r.iter().map(str::to_string).collect()),
                Some(Err(e)) => Err(CliError::config(what.to_string(), e.to_string())),
                None => Err(CliError::config(what.to_string(), "missing line")),
            }
        };
        let schema = next("schema")?.into_iter().next().unwrap_or_default();
        let columns = next("columns")?;
        let mut rows = Vec::new();
        for r in records {
            let r = r.map_err(|e| CliError::config("row", e.to_string()))?;
            if r.len() != columns.len() {
                return Err(CliError::config("row", "field count differs from header"));
            }
            rows.push(r.iter().map(str::to_string).collect());
        }
        Ok(Table {
            schema,
            columns,
            rows,
        })
    }

    /// Parses a results table back into records.
    pub fn into_results(self) -> CliResult<Vec<ResultRecord>> {
        if self.schema != RESULT_SCHEMA {
            return Err(CliError::config(
                "schema",
                format!("expected {RESULT_SCHEMA}, got {}", self.schema),
            ));
        }
        if self.columns != RESULT_COLUMNS {
            return Err(CliError::config("columns", "unexpected result columns"));
        }
        self.rows
            .iter()
            .map(|r| ResultRecord::from_fields(&r.iter().map(String::as_str).collect::<Vec<_>>()))
            .collect()
    }

    pub fn write(&self, path: &std::path::Path) -> CliResult<()> {
        let mut f = std::fs::File::create(path).map_err(|e| CliError::output(path, e))?;
        f.write_all(&self.to_bytes())
            .map_err(|e| CliError::output(path, e))
    }
}
