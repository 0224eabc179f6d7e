use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Ordinal credit grade, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CreditGrade {
    #[serde(rename = "AAA")]
    Aaa,
    #[serde(rename = "AA")]
    Aa,
    #[serde(rename = "A")]
    A,
    #[serde(rename = "BBB")]
    Bbb,
    #[serde(rename = "BB")]
    Bb,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "CCC")]
    Ccc,
}

impl CreditGrade {
    pub const ALL: [CreditGrade; 7] = [
        CreditGrade::Aaa,
        CreditGrade::Aa,
        CreditGrade::A,
        CreditGrade::Bbb,
        CreditGrade::Bb,
        CreditGrade::B,
        CreditGrade::Ccc,
    ];

    pub fn is_investment_grade(self) -> bool {
        self <= CreditGrade::Bbb
    }

    /// Lowest grade on the scale; not in default.
    pub fn is_lowest(self) -> bool {
        self == CreditGrade::Ccc
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CreditGrade::Aaa => "AAA",
            CreditGrade::Aa => "AA",
            CreditGrade::A => "A",
            CreditGrade::Bbb => "BBB",
            CreditGrade::Bb => "BB",
            CreditGrade::B => "B",
            CreditGrade::Ccc => "CCC",
        }
    }
}

impl fmt::Display for CreditGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CreditGrade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CreditGrade::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Data(format!("unknown credit grade `{s}`")))
    }
}

/// One value per grade, AAA first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeTable {
    #[serde(rename = "AAA")]
    pub aaa: f64,
    #[serde(rename = "AA")]
    pub aa: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "BBB")]
    pub bbb: f64,
    #[serde(rename = "BB")]
    pub bb: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "CCC")]
    pub ccc: f64,
}

impl GradeTable {
    pub fn get(&self, grade: CreditGrade) -> f64 {
        self.values()[grade.index()]
    }

    pub fn values(&self) -> [f64; 7] {
        [self.aaa, self.aa, self.a, self.bbb, self.bb, self.b, self.ccc]
    }
}
