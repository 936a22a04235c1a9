//! JSON recipes for `optimize`.
//!
//! Every field is optional. Command-line flags override recipe values, and
//! anything still missing falls back to the problem's defaults. The fully
//! resolved recipe is stored in the run manifest, and a manifest can be fed
//! back through `--recipe`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use duem_core::{Constraint, DegreeSequence, Matrix, PenaltyWeights, ProblemSpec};
use serde::{Deserialize, Serialize};

use crate::args::{GraphName, OptimizeCmd, Problem, Source};
use crate::source::{read_vector, usage};

pub const FROM_GRAPH: &str = "from-graph";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Recipe {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<Problem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laplacian: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_sum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unfold_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $(if $top.$field.is_some() { $base.$field = $top.$field.clone(); })*
    };
}

impl Recipe {
    /// Loads a recipe, or the `parameters` of a run manifest. Relative
    /// paths inside are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(params) = value.get_mut("parameters") {
            value = params.take();
        }
        let mut recipe: Recipe = serde_json::from_value(value)
            .with_context(|| format!("invalid recipe {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = &recipe.laplacian {
            if p.is_relative() {
                recipe.laplacian = Some(dir.join(p));
            }
        }
        if let Some(t) = &recipe.degree_target {
            if t != FROM_GRAPH && Path::new(t).is_relative() {
                recipe.degree_target = Some(dir.join(t).display().to_string());
            }
        }
        Ok(recipe)
    }

    pub fn from_flags(cmd: &OptimizeCmd, seed: Option<u64>) -> Self {
        Self {
            problem: cmd.problem,
            graph: cmd.source.graph,
            n: cmd.source.n,
            m: cmd.source.m,
            laplacian: cmd.source.laplacian.clone(),
            degree_target: cmd.degree_target.clone(),
            degree_sum: cmd.degree_sum,
            theta: cmd.theta,
            t_star: cmd.tstar,
            alpha: cmd.alpha,
            unfold_steps: cmd.unfold_n,
            batch_size: cmd.batch_size,
            iterations: cmd.iters,
            lr: cmd.lr,
            rho1: cmd.rho1,
            rho2: cmd.rho2,
            rho3: cmd.rho3,
            rho4: cmd.rho4,
            seed,
        }
    }

    /// Values set in `top` win. A graph choice in `top` replaces the whole
    /// graph selection of `self`.
    pub fn overlay(mut self, top: &Recipe) -> Self {
        if top.graph.is_some() || top.laplacian.is_some() {
            self.graph = top.graph;
            self.laplacian = top.laplacian.clone();
        }
        overlay!(self, top; problem, n, m, degree_target, degree_sum, theta, t_star, alpha,
            unfold_steps, batch_size, iterations, lr, rho1, rho2, rho3, rho4, seed);
        self
    }

    fn source(&self) -> Source {
        Source {
            graph: self.graph,
            n: self.n,
            m: self.m,
            laplacian: self.laplacian.clone(),
        }
    }

    /// Builds the problem and the baseline Laplacian, and returns the
    /// recipe with every default written out.
    pub fn resolve(&self) -> Result<(ProblemSpec, Matrix, Recipe)> {
        let seed = self.seed.unwrap_or(crate::DEFAULT_SEED);
        let source = self.source();
        if !source.is_set() {
            return usage("optimize needs --graph or --laplacian");
        }
        let base = source.resolve(seed)?;
        let problem = self.problem.unwrap_or(Problem::A);
        let mut resolved = self.clone();
        resolved.problem = Some(problem);
        resolved.seed = Some(seed);

        let mut spec = match problem {
            Problem::A => {
                if self.degree_sum.is_some() {
                    return usage("--degree-sum applies to problem B");
                }
                let target = self
                    .degree_target
                    .clone()
                    .unwrap_or_else(|| FROM_GRAPH.to_string());
                let d = if target == FROM_GRAPH {
                    DegreeSequence::from_laplacian(&base.laplacian)?
                } else {
                    DegreeSequence::new(read_vector(Path::new(&target))?)?
                };
                resolved.degree_target = Some(target);
                ProblemSpec::problem_a(base.graph.clone(), d)
            }
            Problem::B => {
                if self.degree_target.is_some() {
                    return usage("--degree-target applies to problem A");
                }
                let total = self
                    .degree_sum
                    .unwrap_or_else(|| base.laplacian.diag().sum());
                resolved.degree_sum = Some(total);
                ProblemSpec::problem_b(base.graph.clone(), total)
            }
        };

        spec.theta = self.theta.unwrap_or(spec.theta);
        spec.t_star = self.t_star.unwrap_or(spec.t_star);
        spec.alpha = self.alpha.unwrap_or(spec.alpha);
        spec.unfold_steps = self.unfold_steps.unwrap_or(spec.unfold_steps);
        spec.batch_size = self.batch_size.unwrap_or(spec.batch_size);
        spec.iterations = self.iterations.unwrap_or(spec.iterations);
        spec.adam.lr = self.lr.unwrap_or(spec.adam.lr);
        let PenaltyWeights {
            rho1,
            rho2,
            rho3,
            rho4,
        } = spec.penalty;
        spec.penalty = PenaltyWeights {
            rho1: self.rho1.unwrap_or(rho1),
            rho2: self.rho2.unwrap_or(rho2),
            rho3: self.rho3.unwrap_or(rho3),
            rho4: self.rho4.unwrap_or(rho4),
        };
        if let Err(e) = spec.validate() {
            return usage(e.to_string());
        }

        resolved.theta = Some(spec.theta);
        resolved.t_star = Some(spec.t_star);
        resolved.alpha = Some(spec.alpha);
        resolved.unfold_steps = Some(spec.unfold_steps);
        resolved.batch_size = Some(spec.batch_size);
        resolved.iterations = Some(spec.iterations);
        resolved.lr = Some(spec.adam.lr);
        resolved.rho1 = Some(spec.penalty.rho1);
        resolved.rho2 = Some(spec.penalty.rho2);
        resolved.rho3 = Some(spec.penalty.rho3);
        resolved.rho4 = Some(spec.penalty.rho4);
        if matches!(spec.constraint, Constraint::Degree(_)) {
            resolved.degree_sum = None;
        }
        Ok((spec, base.laplacian, resolved))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_recipe() {
        let recipe = Recipe {
            graph: Some(GraphName::Petersen),
            iterations: Some(3000),
            theta: Some(0.1),
            ..Recipe::default()
        };
        let flags = Recipe {
            iterations: Some(10),
            ..Recipe::default()
        };
        let merged = recipe.overlay(&flags);
        assert_eq!(merged.iterations, Some(10));
        assert_eq!(merged.theta, Some(0.1));
        assert_eq!(merged.graph, Some(GraphName::Petersen));
    }

    #[test]
    fn graph_flag_replaces_recipe_source() {
        let recipe = Recipe {
            laplacian: Some(PathBuf::from("l.csv")),
            ..Recipe::default()
        };
        let flags = Recipe {
            graph: Some(GraphName::House),
            ..Recipe::default()
        };
        let merged = recipe.overlay(&flags);
        assert_eq!(merged.graph, Some(GraphName::House));
        assert_eq!(merged.laplacian, None);
    }

    #[test]
    fn resolve_fills_defaults() {
        let recipe = Recipe {
            graph: Some(GraphName::House),
            problem: Some(Problem::B),
            ..Recipe::default()
        };
        let (spec, base, resolved) = recipe.resolve().unwrap();
        assert_eq!(spec.constraint, Constraint::DegreeSum(12.0));
        assert_eq!(base.diag().sum(), 12.0);
        assert_eq!(resolved.rho3, Some(0.1));
        assert_eq!(resolved.batch_size, Some(50));
        let again = resolved.resolve().unwrap().2;
        assert_eq!(again, resolved);
    }

    #[test]
    fn mismatched_constraint_flags_rejected() {
        let recipe = Recipe {
            graph: Some(GraphName::House),
            degree_sum: Some(3.0),
            ..Recipe::default()
        };
        assert!(recipe.resolve().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: std::result::Result<Recipe, _> = serde_json::from_str(r#"{"iters": 5}"#);
        assert!(r.is_err());
    }

    #[test]
    fn checked_in_recipes_resolve() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes");
        let mut count = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let recipe = Recipe::load(&path).unwrap();
            let (spec, _, resolved) = recipe.resolve().unwrap();
            assert_eq!(
                resolved.resolve().unwrap().2,
                resolved,
                "{}",
                path.display()
            );
            assert!(spec.validate().is_ok());
            count += 1;
        }
        assert_eq!(count, 5);
    }
}
