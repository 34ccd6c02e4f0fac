//! Six-significant-digit formatting for report tables.

use dcdual_core::CriticalPointReport;

const SIG: i32 = 6;

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `printf("%.6g")`: fixed notation for exponents in `[-4, 6)`, otherwise
/// scientific, trailing zeros dropped.
pub fn g6(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG).contains(&exp) {
        let fixed = format!("{:.*}", (SIG - 1 - exp) as usize, v);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    }
}

pub fn g6_list(vals: &[f64]) -> String {
    let parts: Vec<String> = vals.iter().map(|&v| g6(v)).collect();
    format!("({})", parts.join(", "))
}

const HEADER: [&str; 9] = [
    "#", "triality", "domain", "zeta", "x", "primal", "dual", "gap", "delta",
];
const WIDTHS: [usize; 9] = [3, 13, 10, 26, 26, 12, 12, 12, 12];

fn row(cells: &[String]) -> String {
    let padded: Vec<String> = cells
        .iter()
        .zip(WIDTHS)
        .map(|(c, w)| format!("{c:<w$}"))
        .collect();
    padded.join(" ").trim_end().to_string()
}

pub fn report_table(reports: &[CriticalPointReport]) -> String {
    let mut lines = vec![row(&HEADER.map(String::from))];
    for (i, r) in reports.iter().enumerate() {
        let zeta: Vec<f64> = r.zeta.stacked().iter().copied().collect();
        lines.push(row(&[
            (i + 1).to_string(),
            r.triality.to_string(),
            r.domain.to_string(),
            g6_list(&zeta),
            g6_list(&r.x),
            g6(r.primal_value),
            g6(r.dual_value),
            g6(r.gap_residual),
            g6(r.delta),
        ]));
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::g6;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (-2.842799, "-2.8428"),
            (0.2231043, "0.223104"),
            (54.96412, "54.9641"),
            (1.0, "1"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001234567, "0.000123457"),
            (1.5e-7, "1.5e-07"),
            (999999.7, "1e+06"),
            (0.0, "0"),
        ];
        for (v, s) in cases {
            assert_eq!(g6(v), s, "{v}");
        }
    }
}
