//! Gnuplot script generation from an emitted CSV: SER (or bound) on a log
//! axis versus the sweep axis, one series per distinct parameter group,
//! with the data inlined so the script is self-contained.

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown column layout: no `ser` or `pep_bound` column in {header}")]
    UnknownLayout { header: String },
}

fn column(header: &[&str], name: &str) -> Option<usize> {
    header.iter().position(|h| *h == name)
}

/// Build a gnuplot script for a CSV produced by this tool. Returns the
/// script and the number of series it plots (zero for an empty CSV).
pub fn plot_script(csv_text: &str, title: &str) -> Result<(String, usize), PlotError> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = match lines.next() {
        Some(h) => h.split(',').collect(),
        None => Vec::new(),
    };
    let y_col = column(&header, "ser").or_else(|| column(&header, "pep_bound"));
    let y_col = match y_col {
        Some(c) => c,
        None => {
            return Err(PlotError::UnknownLayout {
                header: header.join(","),
            })
        }
    };
    let y_name = header[y_col];
    let rows: Vec<Vec<&str>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').collect())
        .collect();

    // Sweep axis: whichever of snr_db / v_mps varies (snr takes priority).
    let axis_col = ["snr_db", "v_mps"]
        .iter()
        .filter_map(|n| column(&header, n))
        .find(|&c| {
            let mut values = rows.iter().map(|r| r[c]);
            let first = values.next();
            values.any(|v| Some(v) != first)
        })
        .or_else(|| column(&header, "v_mps"))
        .unwrap_or(0);

    // Group key: every other column that varies and is not a result.
    let result_cols: Vec<usize> = [
        "decisions",
        "errors",
        "ser",
        "ci_low",
        "ci_high",
        "pep_bound",
        "pep_floor",
        "pep_bound_log10",
        "pep_floor_log10",
        "case",
        "l",
        "rho_l",
        "rho_l1",
        "safeguard_applied",
        "bound",
    ]
    .iter()
    .filter_map(|n| column(&header, n))
    .collect();
    let group_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != axis_col && !result_cols.contains(&c))
        .filter(|&c| {
            let mut values = rows.iter().map(|r| r[c]);
            let first = values.next();
            values.any(|v| Some(v) != first)
        })
        .collect();

    let mut series: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let extra_series: Vec<usize> = ["pep_bound", "pep_floor"]
        .iter()
        .filter_map(|n| column(&header, n))
        .filter(|&c| c != y_col)
        .collect();
    for row in &rows {
        let key_base: String = if group_cols.is_empty() {
            y_name.to_string()
        } else {
            group_cols
                .iter()
                .map(|&c| format!("{}={}", header[c], row[c]))
                .collect::<Vec<_>>()
                .join(" ")
        };
        series
            .entry(key_base.clone())
            .or_default()
            .push((row[axis_col].to_string(), row[y_col].to_string()));
        for &c in &extra_series {
            if !row[c].is_empty() {
                series
                    .entry(format!("{key_base} {}", header[c]))
                    .or_default()
                    .push((row[axis_col].to_string(), row[c].to_string()));
            }
        }
    }

    let mut script = String::new();
    script.push_str(&format!("# generated from {title}\n"));
    script.push_str("set datafile separator ','\n");
    script.push_str(&format!("set xlabel '{}'\n", header.get(axis_col).unwrap_or(&"x")));
    script.push_str(&format!("set ylabel '{y_name}'\n"));
    script.push_str("set logscale y\nset key outside\nset grid\n");
    if series.is_empty() {
        script.push_str("# no data rows; nothing to plot\n");
        return Ok((script, 0));
    }
    let titles: Vec<String> = series
        .keys()
        .map(|k| format!("'-' using 1:2 with linespoints title '{k}'"))
        .collect();
    script.push_str(&format!("plot {}\n", titles.join(", \\\n     ")));
    for pts in series.values() {
        for (x, y) in pts {
            script.push_str(&format!("{x} {y}\n"));
        }
        script.push_str("e\n");
    }
    Ok((script, series.len()))
}
