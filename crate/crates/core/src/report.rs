//! Structured pass/fail reporting shared by the scenario suite and the CLI.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The question cannot be settled at the working (p, u) precision.
    Indeterminate,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// One checked statement: what was claimed, how the expected value was
/// obtained (`basis`), what happened, and a witness when something failed.
#[derive(Clone, Debug)]
pub struct Claim {
    pub name: String,
    pub basis: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
}

impl Claim {
    pub fn new(name: &str, basis: &str, verdict: Verdict) -> Self {
        Claim { name: String::from(name), basis: String::from(basis), verdict, witness: None }
    }

    pub fn with_witness(mut self, w: String) -> Self {
        self.witness = Some(w);
        self
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub title: String,
    pub context: String,
    pub seed: Option<u64>,
    pub claims: Vec<Claim>,
}

impl Report {
    pub fn new(title: &str, context: String) -> Self {
        Report { title: String::from(title), context, seed: None, claims: Vec::new() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn push(&mut self, claim: Claim) {
        self.claims.push(claim);
    }

    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn any_fail(&self) -> bool {
        self.claims.iter().any(|c| c.verdict == Verdict::Fail)
    }

    pub fn any_indeterminate(&self) -> bool {
        self.claims.iter().any(|c| c.verdict == Verdict::Indeterminate)
    }
}
