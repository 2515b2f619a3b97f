//! Report rows and their text / CSV rendering.

use nested_mzi::C64;

use crate::config::Format;

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub condition: String,
    pub value: C64,
    /// Equation tag of the closed form the row reproduces, or empty.
    pub provenance: String,
}

impl Row {
    pub fn real(
        quantity: impl Into<String>,
        condition: impl Into<String>,
        value: f64,
        provenance: &str,
    ) -> Self {
        Self::complex(quantity, condition, C64::new(value, 0.0), provenance)
    }

    pub fn complex(
        quantity: impl Into<String>,
        condition: impl Into<String>,
        value: C64,
        provenance: &str,
    ) -> Self {
        Self {
            quantity: quantity.into(),
            condition: condition.into(),
            value,
            provenance: provenance.to_string(),
        }
    }
}

/// A titled list of rows plus free-form text lines shown only in text mode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub notes: Vec<String>,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = format!("{}\n", self.title);
        for n in &self.notes {
            out.push_str(n);
            out.push('\n');
        }
        let q = self
            .rows
            .iter()
            .map(|r| r.quantity.chars().count())
            .max()
            .unwrap_or(0);
        let c = self
            .rows
            .iter()
            .map(|r| r.condition.chars().count())
            .max()
            .unwrap_or(0);
        for r in &self.rows {
            let mut line = format!(
                "  {}{}  {}{}  {}",
                r.quantity,
                pad(&r.quantity, q),
                r.condition,
                pad(&r.condition, c),
                fmt_complex(r.value)
            );
            if !r.provenance.is_empty() {
                line.push_str(&format!("  [{}]", r.provenance));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "quantity",
            "condition",
            "value_re",
            "value_im",
            "provenance_eq",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.quantity.as_str(),
                r.condition.as_str(),
                &r.value.re.to_string(),
                &r.value.im.to_string(),
                r.provenance.as_str(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn pad(s: &str, width: usize) -> String {
    " ".repeat(width - s.chars().count())
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped,
/// exponent form outside `1e-4 <= |x| < 1e12`.
pub fn fmt_g(x: f64) -> String {
    const SIG: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIG as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Real part only when the imaginary part is exactly zero.
pub fn fmt_complex(z: C64) -> String {
    if z.im == 0.0 {
        fmt_g(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", fmt_g(z.re), fmt_g(z.im.abs()))
    }
}
