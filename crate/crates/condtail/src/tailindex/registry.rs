//! Name-based construction of tail functionals.
//!
//! The estimators are selected at runtime (CLI flag, config file), so the
//! functionals register themselves under stable names in a
//! [`FunctionalRegistry`] and are built from a name plus an optional
//! parameter bundle. Custom functionals can be registered alongside the
//! built-ins; registering an existing name replaces it.

use std::collections::HashMap;
use std::sync::Arc;

use super::functionals::{CaeiroGomes, GomesMartins, Hill, Pickands, Segers};
use super::TailFunctional;
use crate::error::{Error, Result};

/// Optional tuning parameters passed to a functional builder. Builders
/// reject parameters they do not take, so a stray `--p` is an error rather
/// than silently ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhiParams {
    pub p: Option<f64>,
    pub theta: Option<f64>,
}

/// Constructs a functional from its parameters.
pub type FunctionalBuilder =
    Arc<dyn Fn(&PhiParams) -> Result<Box<dyn TailFunctional>> + Send + Sync>;

/// Registry mapping functional names to builders.
pub struct FunctionalRegistry {
    builders: HashMap<String, FunctionalBuilder>,
}

fn no_parameters(name: &str, params: &PhiParams) -> Result<()> {
    if params.p.is_some() || params.theta.is_some() {
        return Err(Error::invalid_input(format!(
            "the {name} functional takes no parameters"
        )));
    }
    Ok(())
}

fn no_theta(name: &str, params: &PhiParams) -> Result<()> {
    if params.theta.is_some() {
        return Err(Error::invalid_input(format!(
            "the {name} functional takes no theta parameter"
        )));
    }
    Ok(())
}

fn require_p(name: &str, params: &PhiParams) -> Result<f64> {
    params.p.ok_or_else(|| {
        Error::invalid_input(format!("the {name} functional requires parameter p"))
    })
}

impl FunctionalRegistry {
    /// An empty registry.
    pub fn new() -> Self {
        FunctionalRegistry { builders: HashMap::new() }
    }

    /// A registry holding the five built-in functionals: `hill`,
    /// `gomes-martins`, `segers`, `caeiro-gomes`, `pickands`.
    pub fn with_builtins() -> Self {
        let mut reg = FunctionalRegistry::new();
        reg.register(
            "hill",
            Arc::new(|params: &PhiParams| {
                no_parameters("hill", params)?;
                Ok(Box::new(Hill) as Box<dyn TailFunctional>)
            }),
        );
        reg.register(
            "gomes-martins",
            Arc::new(|params: &PhiParams| {
                no_theta("gomes-martins", params)?;
                let p = require_p("gomes-martins", params)?;
                Ok(Box::new(GomesMartins::new(p)?) as Box<dyn TailFunctional>)
            }),
        );
        reg.register(
            "segers",
            Arc::new(|params: &PhiParams| {
                no_theta("segers", params)?;
                let p = require_p("segers", params)?;
                Ok(Box::new(Segers::new(p)?) as Box<dyn TailFunctional>)
            }),
        );
        reg.register(
            "caeiro-gomes",
            Arc::new(|params: &PhiParams| {
                let p = require_p("caeiro-gomes", params)?;
                let theta = params.theta.ok_or_else(|| {
                    Error::invalid_input(
                        "the caeiro-gomes functional requires parameter theta".to_string(),
                    )
                })?;
                Ok(Box::new(CaeiroGomes::new(p, theta)?) as Box<dyn TailFunctional>)
            }),
        );
        reg.register(
            "pickands",
            Arc::new(|params: &PhiParams| {
                no_parameters("pickands", params)?;
                Ok(Box::new(Pickands) as Box<dyn TailFunctional>)
            }),
        );
        reg
    }

    /// Register a builder under a name, replacing any existing entry.
    pub fn register(&mut self, name: impl Into<String>, builder: FunctionalBuilder) {
        self.builders.insert(name.into(), builder);
    }

    /// The registered names, sorted.
    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.builders.keys().cloned().collect();
        names.sort();
        names
    }

    /// Build the functional registered under `name`.
    pub fn build(&self, name: &str, params: &PhiParams) -> Result<Box<dyn TailFunctional>> {
        let builder = self.builders.get(name).ok_or_else(|| Error::UnknownFunctional {
            name: name.to_string(),
            known: self.names().join(", "),
        })?;
        builder(params)
    }
}

impl Default for FunctionalRegistry {
    fn default() -> Self {
        FunctionalRegistry::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_registered_under_sorted_names() {
        let reg = FunctionalRegistry::with_builtins();
        assert_eq!(
            reg.names(),
            vec!["caeiro-gomes", "gomes-martins", "hill", "pickands", "segers"]
        );
    }

    #[test]
    fn builds_dispatch_parameters() {
        let reg = FunctionalRegistry::with_builtins();
        let none = PhiParams::default();
        assert_eq!(reg.build("hill", &none).unwrap().name(), "hill");
        assert_eq!(reg.build("pickands", &none).unwrap().name(), "pickands");
        let with_p = PhiParams { p: Some(2.0), theta: None };
        assert_eq!(reg.build("gomes-martins", &with_p).unwrap().name(), "gomes-martins");
        assert_eq!(reg.build("segers", &with_p).unwrap().name(), "segers");
        let both = PhiParams { p: Some(1.5), theta: Some(0.5) };
        assert_eq!(reg.build("caeiro-gomes", &both).unwrap().name(), "caeiro-gomes");
    }

    #[test]
    fn parameter_misuse_is_rejected_with_named_messages() {
        let reg = FunctionalRegistry::with_builtins();
        let with_p = PhiParams { p: Some(2.0), theta: None };
        let err = reg.build("hill", &with_p).err().expect("stray p must be rejected");
        assert!(err.to_string().contains("hill"), "{err}");
        let err = reg
            .build("gomes-martins", &PhiParams::default())
            .err()
            .expect("a missing p must be rejected");
        assert!(err.to_string().contains("parameter p"), "{err}");
        let err = reg.build("caeiro-gomes", &with_p).err().expect("missing theta must be rejected");
        assert!(err.to_string().contains("theta"), "{err}");
        let bad_theta = PhiParams { p: Some(2.0), theta: Some(-1.0) };
        assert!(reg.build("caeiro-gomes", &bad_theta).is_err());
        let stray_theta = PhiParams { p: Some(2.0), theta: Some(1.0) };
        assert!(reg.build("segers", &stray_theta).is_err());
    }

    #[test]
    fn unknown_names_list_the_known_ones() {
        let reg = FunctionalRegistry::with_builtins();
        let err = reg.build("hil", &PhiParams::default()).err().expect("unknown name");
        match &err {
            Error::UnknownFunctional { name, known } => {
                assert_eq!(name, "hil");
                assert!(known.contains("hill") && known.contains("pickands"), "{known}");
            }
            other => panic!("expected UnknownFunctional, got {other}"),
        }
    }

    #[test]
    fn registering_an_existing_name_replaces_it() {
        let mut reg = FunctionalRegistry::with_builtins();
        reg.register(
            "hill",
            Arc::new(|params: &PhiParams| {
                let p = require_p("hill", params)?;
                Ok(Box::new(GomesMartins::new(p)?) as Box<dyn TailFunctional>)
            }),
        );
        // The replacement builder now answers for "hill".
        let built =
            reg.build("hill", &PhiParams { p: Some(2.0), theta: None }).unwrap();
        assert_eq!(built.name(), "gomes-martins");
        assert_eq!(reg.names().iter().filter(|n| n.as_str() == "hill").count(), 1);
    }
}
