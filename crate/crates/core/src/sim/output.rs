use std::io::Write;

use super::run::{MetricsRow, Summary};
use crate::error::Result;

pub const METRICS_HEADER: [&str; 7] = [
    "frame",
    "time_s",
    "erle_db",
    "misalignment_db",
    "eta",
    "mu_mean",
    "double_talk_active",
];

pub const SUMMARY_HEADER: [&str; 5] = [
    "policy",
    "nfr_db",
    "erle_ss_db",
    "erle_ss_excl_switch_db",
    "final_misalignment_db",
];

/// Six significant digits in the style of C's `%g`: fixed notation for
/// decimal exponents in `-4..6`, scientific otherwise, trailing zeros
/// removed.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_owned();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_fraction(&fixed).to_owned()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.write_record([
            r.frame.to_string(),
            format_sig6(r.time_s),
            format_sig6(r.erle_db),
            format_sig6(r.misalignment_db),
            r.eta.map(format_sig6).unwrap_or_default(),
            format_sig6(r.mu_mean),
            u8::from(r.double_talk_active).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(summaries: &[Summary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        w.write_record([
            s.policy.name().to_owned(),
            format_sig6(s.nfr_db),
            format_sig6(s.erle_ss_db),
            format_sig6(s.erle_ss_excl_switch_db),
            format_sig6(s.final_misalignment_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canceller::PolicyKind;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-20.0, "-20"),
            (23.456789, "23.4568"),
            (0.008, "0.008"),
            (0.000123456789, "0.000123457"),
            (0.0000123456789, "1.23457e-05"),
            (123456.7, "123457"),
            (999999.5, "1e+06"),
            (1234567.0, "1.23457e+06"),
            (-100.0, "-100"),
            (0.1, "0.1"),
            (f64::NEG_INFINITY, "-inf"),
        ];
        for (x, s) in cases {
            assert_eq!(format_sig6(x), s, "{x}");
        }
    }

    #[test]
    fn metrics_layout() {
        let rows = [
            MetricsRow {
                frame: 0,
                time_s: 0.0,
                erle_db: 12.3456789,
                misalignment_db: -3.0,
                eta: Some(0.1),
                mu_mean: 0.25,
                double_talk_active: true,
            },
            MetricsRow {
                frame: 1,
                time_s: 0.008,
                erle_db: 0.0,
                misalignment_db: 0.0,
                eta: None,
                mu_mean: 0.0,
                double_talk_active: false,
            },
        ];
        let mut buf = Vec::new();
        write_metrics_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "frame,time_s,erle_db,misalignment_db,eta,mu_mean,double_talk_active\n\
             0,0,12.3457,-3,0.1,0.25,1\n\
             1,0.008,0,0,,0,0\n"
        );
    }

    #[test]
    fn summary_layout() {
        let s = Summary {
            policy: PolicyKind::Fixed(0.25),
            nfr_db: -10.0,
            erle_ss_db: 7.25,
            erle_ss_excl_switch_db: 8.0,
            final_misalignment_db: -12.5,
            eta_min: None,
            eta_max: None,
        };
        let mut buf = Vec::new();
        write_summary_csv(&[s], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "policy,nfr_db,erle_ss_db,erle_ss_excl_switch_db,final_misalignment_db\nfixed,-10,7.25,8,-12.5\n"
        );
    }
}
