//! Report model and writers: JSON (schema-versioned), a CSV mirror of the
//! metric table, and an optional gnuplot script that reads the CSV.

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// One measured quantity with its pass criterion. `pass` encodes the
/// direction: constructors decide whether the value must stay at or below
/// the tolerance (deviations, norms) or at or above it (margins, flags).
#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Metric {
    /// Deviation-style metric: passes when value <= tolerance.
    pub fn upper(name: &str, value: f64, tolerance: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Margin-style metric: passes when value >= tolerance.
    pub fn lower(name: &str, value: f64, tolerance: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            tolerance,
            pass: value >= tolerance,
        }
    }

    /// Boolean predicate rendered as 0/1 against a 0.5 threshold.
    pub fn flag(name: &str, ok: bool) -> Self {
        Metric {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            tolerance: 0.5,
            pass: ok,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub check_name: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub metrics: Vec<Metric>,
    pub overall_pass: bool,
    pub runtime_ms: u64,
}

impl Report {
    pub fn new(
        check_name: &str,
        params: BTreeMap<String, serde_json::Value>,
        metrics: Vec<Metric>,
    ) -> Self {
        let overall_pass = metrics.iter().all(|m| m.pass);
        Report {
            schema_version: SCHEMA_VERSION,
            check_name: check_name.into(),
            params,
            metrics,
            overall_pass,
            runtime_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,value,tolerance,pass\n");
        for m in &self.metrics {
            s.push_str(&format!("{},{},{},{}\n", m.name, m.value, m.tolerance, m.pass));
        }
        s
    }

    /// A generic gnuplot script over the CSV mirror: metric values as
    /// points against their tolerances as lines, log scale.
    pub fn plot_script(&self, csv_path: &str) -> String {
        format!(
            "# gnuplot script for the '{check}' report; reads the CSV mirror\n\
             set datafile separator ','\n\
             set title '{check}'\n\
             set ylabel 'value'\n\
             set logscale y\n\
             set xtics rotate by -35\n\
             set key outside\n\
             plot '{csv}' every ::1 using 2:xtic(1) with points pt 7 ps 1.4 title 'value', \\\n\
                  '{csv}' every ::1 using 3 with linespoints lt 2 pt 4 title 'tolerance'\n",
            check = self.check_name,
            csv = csv_path,
        )
    }
}

/// Helper to build the params map with deterministic key order.
pub fn param_f64(map: &mut BTreeMap<String, serde_json::Value>, key: &str, v: f64) {
    map.insert(
        key.into(),
        serde_json::Number::from_f64(v)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null),
    );
}

pub fn param_u64(map: &mut BTreeMap<String, serde_json::Value>, key: &str, v: u64) {
    map.insert(key.into(), serde_json::Value::Number(v.into()));
}

pub fn param_str(map: &mut BTreeMap<String, serde_json::Value>, key: &str, v: &str) {
    map.insert(key.into(), serde_json::Value::String(v.into()));
}
