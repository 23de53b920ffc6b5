//! Per-iteration record of the outer solver and its CSV form.

use std::io::Write;

use crate::model::EnergyParts;

pub const TRACE_HEADER: &str = "iter,E,O,D,R,zeta1,zeta2,L1,L2,gap_u,gap_v,inner_iters";

/// One accepted outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// 1-based index of the accepted iterate.
    pub iter: usize,
    pub energy: EnergyParts,
    pub zeta1: f64,
    pub zeta2: f64,
    pub l1: f64,
    pub l2: f64,
    pub gap_u: f64,
    pub gap_v: f64,
    /// Primal-dual iterations spent on the accepted v-step, summed over channels.
    pub inner_iters: usize,
    /// Set when an inner solve stopped on its iteration cap.
    pub inner_capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    /// Energy at the starting point.
    pub initial: EnergyParts,
    pub rows: Vec<TraceRow>,
    /// True when the relative-energy test fired before the iteration cap.
    pub converged: bool,
}

impl EnergyTrace {
    pub fn new(initial: EnergyParts) -> Self {
        Self { initial, rows: Vec::new(), converged: false }
    }

    pub fn last_energy(&self) -> EnergyParts {
        self.rows.last().map_or(self.initial, |r| r.energy)
    }

    /// `|E_k - E_{k-1}| / |E_k|` of the last accepted step, or `None` before
    /// the first step.
    pub fn terminal_relative_change(&self) -> Option<f64> {
        let last = self.rows.last()?;
        let prev = if self.rows.len() >= 2 {
            self.rows[self.rows.len() - 2].energy.total
        } else {
            self.initial.total
        };
        Some(relative_change(prev, last.energy.total))
    }

    pub fn any_inner_capped(&self) -> bool {
        self.rows.iter().any(|r| r.inner_capped)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in &self.rows {
            let reals = [
                r.energy.total,
                r.energy.osmosis,
                r.energy.fidelity,
                r.energy.regularizer,
                r.zeta1,
                r.zeta2,
                r.l1,
                r.l2,
                r.gap_u,
                r.gap_v,
            ];
            write!(out, "{}", r.iter)?;
            for v in reals {
                write!(out, ",{}", format_sig12(v))?;
            }
            writeln!(out, ",{}", r.inner_iters)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Relative energy change used as the stopping test. Two zero energies count
/// as no change.
pub fn relative_change(prev: f64, next: f64) -> f64 {
    let diff = (next - prev).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / next.abs()
    }
}

/// Formats a real with 12 significant digits in the style of C's `%.12g`.
pub fn format_sig12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_matches_c_style() {
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(-2.5), "-2.5");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(123456.789), "123456.789");
        assert_eq!(format_sig12(1e-7), "1e-07");
        assert_eq!(format_sig12(-1.234e-9), "-1.234e-09");
        assert_eq!(format_sig12(6.02214076e23), "6.02214076e+23");
        assert_eq!(format_sig12(0.0001), "0.0001");
        assert_eq!(format_sig12(999999999999.5), "1e+12");
    }

    #[test]
    fn relative_change_edge_cases() {
        assert_eq!(relative_change(0.0, 0.0), 0.0);
        assert_eq!(relative_change(2.0, 1.0), 1.0);
    }

    #[test]
    fn csv_layout() {
        let e = EnergyParts { total: 3.0, osmosis: 1.0, fidelity: 1.5, regularizer: 5.0 };
        let mut t = EnergyTrace::new(e);
        t.rows.push(TraceRow {
            iter: 1,
            energy: e,
            zeta1: 0.198,
            zeta2: 0.1,
            l1: 1.0,
            l2: 2.0,
            gap_u: -1e-3,
            gap_v: -2.0,
            inner_iters: 42,
            inner_capped: false,
        });
        let csv = t.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.next(), Some("1,3,1,1.5,5,0.198,0.1,1,2,-0.001,-2,42"));
        assert_eq!(lines.next(), None);
    }
}
