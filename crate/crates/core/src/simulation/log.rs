use std::fmt::Write as _;
use std::io::{self, Write};

pub const CSV_HEADER: &str = "t,eta1,eta2,eta3,eta4,eta5,eta6,nu1,nu2,nu3,nu4,nu5,nu6,\
etad1,etad2,etad3,etad4,etad5,etad6,tau1,tau2,tau3,tau4,tau5,tau6,\
tauhat1,tauhat2,tauhat3,tauhat4,tauhat5,tauhat6,taud1,taud2,taud3,taud4,taud5,taud6,\
s1,s2,s3,s4,s5,s6,gamma1,gamma2,gamma3,gamma4,gamma5,gamma6,Vc,Jrun";

/// One logged time step. `tau_hat` is the estimate the controller used.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub eta: [f64; 6],
    pub nu: [f64; 6],
    pub eta_d: [f64; 6],
    pub tau: [f64; 6],
    pub tau_hat: [f64; 6],
    pub tau_d: [f64; 6],
    pub s: [f64; 6],
    pub gamma: [f64; 6],
    pub vc: f64,
    pub j_run: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimLog {
    pub rows: Vec<LogRow>,
}

/// Shortest round-trip representation; exponent form outside a readable range.
pub fn fmt_f64(out: &mut String, v: f64) {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e15).contains(&a) || !v.is_finite() {
        write!(out, "{v}").unwrap();
    } else {
        write!(out, "{v:e}").unwrap();
    }
}

impl SimLog {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut line = String::with_capacity(1024);
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            line.clear();
            fmt_f64(&mut line, r.t);
            for block in [&r.eta, &r.nu, &r.eta_d, &r.tau, &r.tau_hat, &r.tau_d, &r.s, &r.gamma] {
                for v in block {
                    line.push(',');
                    fmt_f64(&mut line, *v);
                }
            }
            for v in [r.vc, r.j_run] {
                line.push(',');
                fmt_f64(&mut line, v);
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_has_fifty_one_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), 1 + 8 * 6 + 2);
        assert!(CSV_HEADER.starts_with("t,eta1,") && CSV_HEADER.ends_with(",Vc,Jrun"));
    }

    #[test]
    fn values_round_trip() {
        let row = LogRow { t: 0.01, vc: 1.0 / 3.0, j_run: 1e-300, eta: [-2.5e17, 0.0, 1e-7, 3.0, -0.1, 7.25], ..LogRow::default() };
        let csv = SimLog { rows: vec![row] }.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let vals: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), 51);
        assert_eq!(vals[0], 0.01);
        assert_eq!(&vals[1..7], &row.eta);
        assert_eq!(vals[49], 1.0 / 3.0);
        assert_eq!(vals[50], 1e-300);
    }
}
