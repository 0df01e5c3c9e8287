//! The trace CSV format: a fixed header, one row per sample, floats with 17
//! significant digits and flags as 0/1.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use gfmlab::engine::TraceSample;
use gfmlab::Trace;

pub const HEADER: [&str; 16] = [
    "time_s",
    "f_grid_hz",
    "f_pll_hz",
    "p_pu",
    "q_pu",
    "p_ref_eff_pu",
    "delta_i_rad",
    "delta_pcc_rad",
    "delta_g_rad",
    "i_d_pu",
    "i_q_pu",
    "i_mag_pu",
    "v_pcc_mag_pu",
    "soc",
    "sat_power",
    "sat_current",
];

/// Round-trip float formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(s: &TraceSample) -> [String; 16] {
    let flag = |b: bool| if b { "1".to_string() } else { "0".to_string() };
    [
        fmt_f64(s.t),
        fmt_f64(s.f_grid),
        fmt_f64(s.f_pll),
        fmt_f64(s.p),
        fmt_f64(s.q),
        fmt_f64(s.p_ref_eff),
        fmt_f64(s.delta_i),
        fmt_f64(s.delta_pcc),
        fmt_f64(s.delta_g),
        fmt_f64(s.i_d),
        fmt_f64(s.i_q),
        fmt_f64(s.i_mag),
        fmt_f64(s.v_pcc_mag),
        fmt_f64(s.soc),
        flag(s.sat_power),
        flag(s.sat_current),
    ]
}

pub fn write_trace<W: Write>(tr: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for s in &tr.samples {
        w.write_record(row(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_bytes(tr: &Trace) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_trace(tr, &mut buf)?;
    Ok(buf)
}

/// Columns of a trace CSV by name, in file order.
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }
}

pub fn read_table<R: Read>(input: R) -> Result<Table> {
    let mut r = csv::Reader::from_reader(input);
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if names != HEADER {
        bail!("unexpected header; expected {}", HEADER.join(","));
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v: f64 = field
                .trim()
                .parse()
                .with_context(|| format!("row {}: '{field}' is not a number", line + 2))?;
            col.push(v);
        }
    }
    Ok(Table { names, columns })
}

pub fn read_trace<R: Read>(input: R) -> Result<Trace> {
    let t = read_table(input)?;
    let c = &t.columns;
    let samples = (0..c[0].len())
        .map(|k| TraceSample {
            t: c[0][k],
            f_grid: c[1][k],
            f_pll: c[2][k],
            p: c[3][k],
            q: c[4][k],
            p_ref_eff: c[5][k],
            delta_i: c[6][k],
            delta_pcc: c[7][k],
            delta_g: c[8][k],
            i_d: c[9][k],
            i_q: c[10][k],
            i_mag: c[11][k],
            v_pcc_mag: c[12][k],
            soc: c[13][k],
            sat_power: c[14][k] != 0.0,
            sat_current: c[15][k] != 0.0,
        })
        .collect();
    Ok(Trace::new(samples))
}
