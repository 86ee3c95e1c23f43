use std::io::{Read, Write};

use repeater_core::{ChainConfig, RunMetrics};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Column order of every emitted CSV. Changing it breaks downstream readers.
pub const COLUMNS: [&str; 27] = [
    "total_length",
    "n_nodes",
    "t_depol",
    "f_target",
    "op_latency",
    "light_speed",
    "attenuation_length",
    "attempt_mode",
    "purification_success_mode",
    "pairing_mode",
    "time_model",
    "representation",
    "purification_enabled",
    "round_cap",
    "seed",
    "generation_time",
    "final_fidelity",
    "feasible",
    "swap_rounds",
    "sync_time",
    "purification_time",
    "swap_time",
    "raw_attempts",
    "purification_attempts",
    "cost_total",
    "cost_product",
    "layer_costs",
];

/// Columns that describe the configuration rather than the outcome.
pub const CONFIG_COLUMNS: &[&str] = &[
    "total_length",
    "n_nodes",
    "t_depol",
    "f_target",
    "op_latency",
    "light_speed",
    "attenuation_length",
    "attempt_mode",
    "purification_success_mode",
    "pairing_mode",
    "time_model",
    "representation",
    "purification_enabled",
    "round_cap",
    "seed",
];

/// One run, flattened for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub config: ChainConfig,
    pub generation_time: f64,
    pub final_fidelity: f64,
    pub feasible: bool,
    pub swap_rounds: usize,
    pub sync_time: f64,
    pub purification_time: f64,
    pub swap_time: f64,
    pub raw_attempts: f64,
    pub purification_attempts: u64,
    pub cost_total: f64,
    pub cost_product: f64,
    pub layer_costs: Vec<f64>,
}

impl ResultRow {
    pub fn new(config: &ChainConfig, metrics: &RunMetrics) -> Self {
        Self {
            config: config.clone(),
            generation_time: metrics.generation_time,
            final_fidelity: metrics.final_fidelity,
            feasible: metrics.feasible,
            swap_rounds: metrics.swap_rounds,
            sync_time: metrics.sync_time,
            purification_time: metrics.purification_time,
            swap_time: metrics.swap_time,
            raw_attempts: metrics.raw_attempts,
            purification_attempts: metrics.purification_attempts,
            cost_total: metrics.cost.total,
            cost_product: metrics.cost.chain_product,
            layer_costs: metrics.cost.layer_costs.clone(),
        }
    }

    pub fn to_record(&self) -> Vec<String> {
        let c = &self.config;
        vec![
            num(c.total_length),
            c.n_nodes.to_string(),
            num(c.t_depol),
            num(c.f_target),
            num(c.op_latency),
            num(c.light_speed),
            num(c.attenuation_length),
            label(&c.attempt_mode),
            label(&c.purification_success_mode),
            label(&c.pairing_mode),
            label(&c.time_model),
            label(&c.representation),
            c.purification_enabled.to_string(),
            c.round_cap.to_string(),
            c.seed.to_string(),
            num(self.generation_time),
            num(self.final_fidelity),
            self.feasible.to_string(),
            self.swap_rounds.to_string(),
            num(self.sync_time),
            num(self.purification_time),
            num(self.swap_time),
            num(self.raw_attempts),
            self.purification_attempts.to_string(),
            num(self.cost_total),
            num(self.cost_product),
            self.layer_costs.iter().map(|&v| num(v)).collect::<Vec<_>>().join(";"),
        ]
    }

    pub fn from_record(record: &csv::StringRecord) -> CliResult<Self> {
        if record.len() != COLUMNS.len() {
            return Err(bad(format!(
                "expected {} fields, found {}",
                COLUMNS.len(),
                record.len()
            )));
        }
        let field = |i: usize| &record[i];
        let mut config = ChainConfig::new(
            parse(COLUMNS[0], field(0))?,
            parse(COLUMNS[1], field(1))?,
            parse(COLUMNS[2], field(2))?,
            parse(COLUMNS[3], field(3))?,
        );
        config.op_latency = parse(COLUMNS[4], field(4))?;
        config.light_speed = parse(COLUMNS[5], field(5))?;
        config.attenuation_length = parse(COLUMNS[6], field(6))?;
        config.attempt_mode = unlabel(COLUMNS[7], field(7))?;
        config.purification_success_mode = unlabel(COLUMNS[8], field(8))?;
        config.pairing_mode = unlabel(COLUMNS[9], field(9))?;
        config.time_model = unlabel(COLUMNS[10], field(10))?;
        config.representation = unlabel(COLUMNS[11], field(11))?;
        config.purification_enabled = parse(COLUMNS[12], field(12))?;
        config.round_cap = parse(COLUMNS[13], field(13))?;
        config.seed = parse(COLUMNS[14], field(14))?;
        let layer_costs = field(26)
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| parse(COLUMNS[26], s))
            .collect::<CliResult<Vec<f64>>>()?;
        Ok(Self {
            config,
            generation_time: parse(COLUMNS[15], field(15))?,
            final_fidelity: parse(COLUMNS[16], field(16))?,
            feasible: parse(COLUMNS[17], field(17))?,
            swap_rounds: parse(COLUMNS[18], field(18))?,
            sync_time: parse(COLUMNS[19], field(19))?,
            purification_time: parse(COLUMNS[20], field(20))?,
            swap_time: parse(COLUMNS[21], field(21))?,
            raw_attempts: parse(COLUMNS[22], field(22))?,
            purification_attempts: parse(COLUMNS[23], field(23))?,
            cost_total: parse(COLUMNS[24], field(24))?,
            cost_product: parse(COLUMNS[25], field(25))?,
            layer_costs,
        })
    }
}

/// Shortest decimal that parses back to the same `f64`; infinity is `inf`.
fn num(v: f64) -> String {
    format!("{v}")
}

fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => panic!("enum did not serialize to a string: {other:?}"),
    }
}

fn unlabel<T: DeserializeOwned>(column: &str, text: &str) -> CliResult<T> {
    serde_json::from_value(serde_json::Value::String(text.to_string()))
        .map_err(|_| bad(format!("column `{column}`: unknown value `{text}`")))
}

fn parse<T: std::str::FromStr>(column: &str, text: &str) -> CliResult<T> {
    text.parse()
        .map_err(|_| bad(format!("column `{column}`: cannot parse `{text}`")))
}

fn bad(msg: String) -> CliError {
    CliError::Usage(format!("malformed result row: {msg}"))
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> CliResult<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(COLUMNS)?;
    for row in rows {
        writer.write_record(row.to_record())?;
    }
    writer.flush().map_err(|e| CliError::io("<csv output>", e))?;
    Ok(())
}

pub fn rows_to_string(rows: &[ResultRow]) -> CliResult<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn read_rows<R: Read>(input: R) -> CliResult<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(COLUMNS.iter().copied()) {
        return Err(bad("header does not match the result-row columns".into()));
    }
    reader.records().map(|r| ResultRow::from_record(&r?)).collect()
}
