use std::io::Write;

use serde::Serialize;

use super::{CharacterMatrix, LatticeFunction};
use crate::error::Result;

#[derive(Serialize)]
pub struct MatrixHeader {
    #[serde(rename = "N")]
    pub modulus: String,
    pub n: usize,
    pub b: Vec<String>,
    pub order: usize,
}

impl CharacterMatrix {
    pub fn header(&self) -> MatrixHeader {
        let s = self.basis();
        MatrixHeader {
            modulus: s.modulus().to_string(),
            n: s.dim(),
            b: s.b().iter().map(|x| x.to_string()).collect(),
            order: self.order(),
        }
    }

    pub fn header_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.header())?)
    }

    /// One line per row: `re,im` for each entry, row-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for row in self.entries().chunks(self.order()) {
            let line: Vec<String> = row.iter().map(|c| format!("{},{}", c.re, c.im)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

impl LatticeFunction {
    /// Lines `x2,...,xn,re,im` in index order, with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let s = self.basis();
        let mut head: Vec<String> = (2..=s.dim()).map(|j| format!("x{j}")).collect();
        head.extend(["re".into(), "im".into()]);
        writeln!(w, "{}", head.join(","))?;
        let points = crate::sysnf::enumerate_ln(s)?;
        for (p, v) in points.iter().zip(self.values()) {
            let mut fields: Vec<String> = p.coords()[1..].iter().map(|c| c.to_string()).collect();
            fields.push(v.re.to_string());
            fields.push(v.im.to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{dft_matrix, LatticeFunction};
    use crate::sysnf::SysNFBasis;
    use num_complex::Complex64;

    #[test]
    fn matrix_csv_shape_and_round_trip() {
        let m = dft_matrix(&SysNFBasis::from_small(5, &[1]).unwrap()).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<Vec<f64>> =
            text.lines().map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 5);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), 10);
            for j in 0..5 {
                assert_eq!(Complex64::new(row[2 * j], row[2 * j + 1]), m.entry(i, j));
            }
        }
        let h: serde_json::Value = serde_json::from_str(&m.header_json().unwrap()).unwrap();
        assert_eq!(h["N"], "5");
        assert_eq!(h["order"], 5);
    }

    #[test]
    fn function_csv() {
        let s = SysNFBasis::from_small(5, &[1, 2]).unwrap();
        let f = LatticeFunction::delta_zero(&s).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x2,x3,re,im");
        assert_eq!(lines[1], "0,0,1,0");
        assert_eq!(lines.len(), 26);
    }
}
