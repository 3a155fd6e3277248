//! CSV formats.
//!
//! Driving paths: header `t,W,<track names…>`, one row per grid point.
//! Curves: header `k,re,im`, one row per vertex starting with the base.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{DrivingPath, HalfPlaneCurve, Side, TimeGrid, Track};
use crate::error::{Error, Result};

pub fn write_driving_csv<W: Write>(d: &DrivingPath, out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "W".to_string()];
    header.extend(d.tracks.iter().map(|t| t.name.clone()));
    wr.write_record(&header)?;
    for k in 0..d.len() {
        let mut row = vec![format!("{:e}", d.times()[k]), format!("{:e}", d.w[k])];
        row.extend(d.tracks.iter().map(|t| format!("{:e}", t.values[k])));
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a driving path; track sides are inferred from the first row and
/// swallowing indices from the first contact with W.
pub fn read_driving_csv<R: Read>(input: R) -> Result<DrivingPath> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 || header[0] != "t" || header[1] != "W" {
        return Err(Error::Domain("driving CSV must start with columns t,W".into()));
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for rec in rd.records() {
        let rec = rec?;
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad number {field:?}")))?;
            cols[i].push(v);
        }
    }
    let w = cols[1].clone();
    let mut d = DrivingPath::new(TimeGrid::new(cols[0].clone())?, w)?;
    for (name, values) in header[2..].iter().zip(cols.drain(2..)) {
        let side = if values[0] >= d.w[0] { Side::Right } else { Side::Left };
        let swallowed = (1..values.len()).find(|&k| values[k] == d.w[k] || {
            let gap = d.w[k] - values[k - 1];
            (side == Side::Right && gap >= 0.0) || (side == Side::Left && gap <= 0.0)
        });
        d.tracks.push(Track { name: name.clone(), side, values, swallowed });
    }
    Ok(d)
}

pub fn write_curve_csv<W: Write>(c: &HalfPlaneCurve, out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["k", "re", "im"])?;
    for (k, p) in c.points.iter().enumerate() {
        wr.write_record([k.to_string(), format!("{:e}", p.re), format!("{:e}", p.im)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(input: R) -> Result<HalfPlaneCurve> {
    let mut rd = csv::Reader::from_reader(input);
    let mut pts = Vec::new();
    for rec in rd.deserialize() {
        let (_, re, im): (usize, f64, f64) = rec?;
        pts.push(Complex64::new(re, im));
    }
    HalfPlaneCurve::new(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::{evolve_points, forward_trace};

    #[test]
    fn driving_round_trip_is_exact() {
        let d = DrivingPath::from_fn(1.0, 50, |t| (9.0 * t).sin() / 3.0).unwrap();
        let d = evolve_points(&d, &[("x".into(), 1.0), ("y".into(), -2.0)]).unwrap();
        let mut buf = Vec::new();
        write_driving_csv(&d, &mut buf).unwrap();
        let back = read_driving_csv(buf.as_slice()).unwrap();
        assert_eq!(back.w, d.w);
        assert_eq!(back.times(), d.times());
        assert_eq!(back.tracks[1].values, d.tracks[1].values);
        assert_eq!(back.tracks[1].side, Side::Left);
    }

    #[test]
    fn curve_round_trip_is_exact() {
        let c = forward_trace(&DrivingPath::from_fn(1.0, 30, |t| t * t).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&c, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("k,re,im\n"));
        assert_eq!(read_curve_csv(buf.as_slice()).unwrap(), c);
    }
}
