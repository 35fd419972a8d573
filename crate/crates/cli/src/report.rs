use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::Profile;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    /// Relative, Willmore energy against the analytic value.
    pub energy: f64,
    /// Absolute, extrapolated density.
    pub density: f64,
    /// Relative, link length against 2π·Θ.
    pub link: f64,
    /// Absolute, Θ − W/4π.
    pub li_yau: f64,
    /// Absolute, angle-defect χ against V − E + F.
    pub gauss_bonnet: f64,
}

impl Tolerances {
    pub fn for_profile(p: Profile) -> Self {
        match p {
            Profile::Strict => Tolerances {
                energy: 0.01,
                density: 0.02,
                link: 0.005,
                li_yau: 0.02,
                gauss_bonnet: 1e-10,
            },
            Profile::Default => Tolerances {
                energy: 0.02,
                density: 0.05,
                link: 0.01,
                li_yau: 0.05,
                gauss_bonnet: 1e-9,
            },
            Profile::Coarse => Tolerances {
                energy: 0.05,
                density: 0.1,
                link: 0.03,
                li_yau: 0.1,
                gauss_bonnet: 1e-6,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn relative(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let pass = ((value - expected) / expected).abs() <= tolerance;
        Check { name: name.into(), value, expected, tolerance, pass }
    }

    pub fn absolute(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (value - expected).abs() <= tolerance;
        Check { name: name.into(), value, expected, tolerance, pass }
    }

    /// value ≤ bound + tolerance.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, expected: bound, tolerance, pass: value <= bound + tolerance }
    }
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub input: String,
    pub input_digest: String,
    pub tolerance_profile: Profile,
    pub tolerances: Tolerances,
    pub blocks: serde_json::Map<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl AnalysisReport {
    pub fn new(input: String, bytes: &[u8], profile: Profile) -> Self {
        AnalysisReport {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            input,
            input_digest: digest(bytes),
            tolerance_profile: profile,
            tolerances: Tolerances::for_profile(profile),
            blocks: serde_json::Map::new(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn block(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report blocks serialize");
        self.blocks.insert(key.into(), v);
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            digest(b""),
            "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn failed_check_fails_report() {
        let mut r = AnalysisReport::new("x".into(), b"x", Profile::Default);
        r.check(Check::relative("a", 1.0, 1.0, 0.01));
        assert!(r.pass);
        r.check(Check::absolute("b", 1.2, 1.0, 0.1));
        assert!(!r.pass);
        assert!(Check::at_most("c", 1.04, 1.0, 0.05).pass);
    }

    #[test]
    fn profiles_are_nested() {
        let s = Tolerances::for_profile(Profile::Strict);
        let d = Tolerances::for_profile(Profile::Default);
        let c = Tolerances::for_profile(Profile::Coarse);
        assert!(s.energy < d.energy && d.energy < c.energy);
        assert!(s.density < d.density && d.density < c.density);
    }
}
