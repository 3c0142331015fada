//! The four streamfunction models, their manufactured-solution forcings and
//! the solve pipeline.

pub mod manufactured;
pub mod params;

use std::fmt;
use std::str::FromStr;

use crate::argyris::{FemField, Space};
use crate::assembly::{apply_constraints, Assembler, BoundaryMode, DofOrdering, SparseMatrix};
use crate::error::{Error, Result};
use crate::mesh::build_structured_mesh;
use crate::quadrature::DEFAULT_DEGREE;
use crate::solver::{newton_solve, solve_linear, NewtonOptions, NewtonReport, QgeSystem};

pub use manufactured::{manufactured, Jet, ManufacturedSolution, Partials, SOLUTION_IDS};
pub use params::{
    munk_from_rossby_reynolds, munk_scale, reynolds_number, rossby_number, stommel_number,
};

/// `J(psi, q) = psi_x q_y - psi_y q_x` from the two gradients.
pub fn jacobian_operator(grad_psi: [f64; 2], grad_q: [f64; 2]) -> f64 {
    grad_psi[0] * grad_q[1] - grad_psi[1] * grad_q[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Biharmonic,
    Stommel,
    StommelMunk,
    Qge,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Biharmonic => "biharmonic",
            ModelKind::Stommel => "stommel",
            ModelKind::StommelMunk => "stommel-munk",
            ModelKind::Qge => "qge",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "biharmonic" => Ok(ModelKind::Biharmonic),
            "stommel" => Ok(ModelKind::Stommel),
            "stommel-munk" => Ok(ModelKind::StommelMunk),
            "qge" => Ok(ModelKind::Qge),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

/// A model with its parameters.
///
/// Strong forms, with `f` the right-hand side:
/// - biharmonic: `lap^2 psi = f`
/// - Stommel: `eps_S lap psi + psi_x = f`
/// - Stommel-Munk: `eps_S lap psi - eps_M lap^2 psi + psi_x = f`
/// - QGE: `Re^{-1} lap^2 psi + J(psi, lap psi) - Ro^{-1} psi_x = f`, where
///   `f = Ro^{-1} F` for the wind forcing `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Biharmonic,
    Stommel { eps_s: f64 },
    StommelMunk { eps_s: f64, eps_m: f64 },
    Qge { re: f64, ro: f64 },
}

impl Model {
    /// Model of the given kind with the parameters of the reference tests:
    /// `eps_S = 0.04` (Stommel), `eps_S = 0.05, eps_M = 6e-5`
    /// (Stommel-Munk), `Re = 1.667, Ro = 1e-4` (QGE).
    pub fn with_defaults(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Biharmonic => Model::Biharmonic,
            ModelKind::Stommel => Model::Stommel { eps_s: 0.04 },
            ModelKind::StommelMunk => Model::StommelMunk {
                eps_s: 0.05,
                eps_m: 6e-5,
            },
            ModelKind::Qge => Model::Qge {
                re: 1.667,
                ro: 1e-4,
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Biharmonic => ModelKind::Biharmonic,
            Model::Stommel { .. } => ModelKind::Stommel,
            Model::StommelMunk { .. } => ModelKind::StommelMunk,
            Model::Qge { .. } => ModelKind::Qge,
        }
    }

    /// Rejects non-positive or non-finite parameters. `eps_M = 0` is
    /// allowed for Stommel-Munk and reduces it to Stommel.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| {
            Error::InvalidParameter(format!("{name} must be positive, got {v}"))
        };
        match *self {
            Model::Biharmonic => Ok(()),
            Model::Stommel { eps_s } if !(eps_s > 0.0 && eps_s.is_finite()) => {
                Err(bad("eps_S", eps_s))
            }
            Model::StommelMunk { eps_s, .. } if !(eps_s > 0.0 && eps_s.is_finite()) => {
                Err(bad("eps_S", eps_s))
            }
            Model::StommelMunk { eps_m, .. } if !(eps_m >= 0.0 && eps_m.is_finite()) => {
                Err(bad("eps_M", eps_m))
            }
            Model::Qge { re, .. } if !(re > 0.0 && re.is_finite()) => Err(bad("Re", re)),
            Model::Qge { ro, .. } if !(ro > 0.0 && ro.is_finite()) => Err(bad("Ro", ro)),
            _ => Ok(()),
        }
    }

    /// Stommel number, for models that have one.
    pub fn stommel_number(&self) -> Option<f64> {
        match *self {
            Model::Stommel { eps_s } | Model::StommelMunk { eps_s, .. } => Some(eps_s),
            _ => None,
        }
    }

    /// Munk scale; for the QGE this is `Ro / Re`.
    pub fn munk_scale(&self) -> Option<f64> {
        match *self {
            Model::StommelMunk { eps_m, .. } => Some(eps_m),
            Model::Qge { re, ro } => Some(ro / re),
            _ => None,
        }
    }

    /// Strong operator applied to the derivatives of `psi`.
    pub fn apply(&self, p: &Partials) -> f64 {
        match *self {
            Model::Biharmonic => p.bilap,
            Model::Stommel { eps_s } => eps_s * p.lap + p.psi_x,
            Model::StommelMunk { eps_s, eps_m } => eps_s * p.lap - eps_m * p.bilap + p.psi_x,
            Model::Qge { re, ro } => {
                p.bilap / re + jacobian_operator([p.psi_x, p.psi_y], [p.lap_x, p.lap_y])
                    - p.psi_x / ro
            }
        }
    }

    /// Right-hand side `f` that makes `solution` exact.
    pub fn forcing(&self, solution: &ManufacturedSolution, x: f64, y: f64) -> f64 {
        self.apply(&solution.partials(x, y))
    }

    /// Boundary treatment used for `solution` unless overridden: clamped for
    /// the fourth-order models; for Stommel, Dirichlet data lifted from the
    /// exact solution when it does not vanish on the boundary.
    pub fn default_boundary(&self, solution: &ManufacturedSolution) -> BoundaryMode {
        match self {
            Model::Stommel { .. } if solution.is_homogeneous() => BoundaryMode::DirichletValue,
            Model::Stommel { .. } => BoundaryMode::LiftedDirichlet,
            _ => BoundaryMode::Clamped,
        }
    }
}

/// A model, exact solution and discretization choices.
#[derive(Debug)]
pub struct ProblemSpec {
    pub model: Model,
    pub solution: ManufacturedSolution,
    pub boundary: BoundaryMode,
    pub ordering: DofOrdering,
    pub quad_degree: usize,
    pub newton: NewtonOptions,
}

impl ProblemSpec {
    /// Pairs `model` with catalog entry `solution_id`. Stommel-type
    /// solutions take their boundary-layer width from the model's `eps_S`.
    pub fn new(model: Model, solution_id: &str) -> Result<Self> {
        model.validate()?;
        let solution = manufactured(solution_id, model.stommel_number())?;
        let boundary = model.default_boundary(&solution);
        Ok(Self {
            model,
            solution,
            boundary,
            ordering: DofOrdering::Strip,
            quad_degree: DEFAULT_DEGREE,
            newton: NewtonOptions::default(),
        })
    }

    /// Discretizes on the mesh of leg `h` and solves.
    pub fn solve(&self, h: f64) -> Result<Solution> {
        let (lx, ly) = self.solution.domain();
        let mesh = build_structured_mesh(lx, ly, h)?;
        let mut space = Space::new(mesh, self.boundary, self.ordering)?;
        if self.boundary == BoundaryMode::LiftedDirichlet {
            space.lift(&self.solution);
        }
        let (coefficients, newton, n_free) = {
            let asm = Assembler::with_degree(&space, self.quad_degree)?;
            let load = asm.load(|x, y| self.model.forcing(&self.solution, x, y));
            match self.model {
                Model::Qge { re, ro } => {
                    let system = QgeSystem::new(&asm, re, ro, load)?;
                    let psi0 = system.initial_guess()?;
                    let (psi, report) = newton_solve(&system, psi0, &self.newton)?;
                    (psi, Some(report), system.index().n_free())
                }
                _ => {
                    let a = self.linear_operator(&asm)?;
                    let reduced = apply_constraints(&a, &load, space.dofmap())?;
                    let x = solve_linear(&reduced.matrix, &reduced.rhs)?;
                    (reduced.expand(&x), None, reduced.index.n_free())
                }
            }
        };
        Ok(Solution {
            space,
            coefficients,
            newton,
            n_free,
        })
    }

    /// Matrix of the linear models, or the linear part of the QGE.
    pub fn linear_operator(&self, asm: &Assembler) -> Result<SparseMatrix> {
        match self.model {
            Model::Biharmonic => Ok(asm.biharmonic()),
            Model::Stommel { eps_s } => SparseMatrix::linear_combination(&[
                (-eps_s, &asm.laplace()),
                (1.0, &asm.transport()),
            ]),
            Model::StommelMunk { eps_s, eps_m } => SparseMatrix::linear_combination(&[
                (-eps_s, &asm.laplace()),
                (-eps_m, &asm.biharmonic()),
                (1.0, &asm.transport()),
            ]),
            Model::Qge { re, ro } => SparseMatrix::linear_combination(&[
                (1.0 / re, &asm.biharmonic()),
                (-1.0 / ro, &asm.transport()),
            ]),
        }
    }
}

/// Discrete solution together with its space.
#[derive(Debug)]
pub struct Solution {
    pub space: Space,
    pub coefficients: Vec<f64>,
    pub newton: Option<NewtonReport>,
    pub n_free: usize,
}

impl Solution {
    pub fn field(&self) -> FemField<'_> {
        FemField::new(&self.space, self.coefficients.clone())
            .expect("coefficient length matches the space")
    }
}

/// Sampler of `q = -Ro lap psi + y`.
#[derive(Debug, Clone)]
pub struct PotentialVorticity<'a> {
    field: &'a FemField<'a>,
    ro: f64,
}

pub fn potential_vorticity<'a>(field: &'a FemField<'a>, ro: f64) -> PotentialVorticity<'a> {
    PotentialVorticity { field, ro }
}

impl PotentialVorticity<'_> {
    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        let d = self.field.eval(x, y)?;
        Ok(-self.ro * (d[3] + d[5]) + y)
    }
}

/// Horizontal velocity `(psi_y, -psi_x)`.
pub fn velocity(field: &FemField, x: f64, y: f64) -> Result<(f64, f64)> {
    let d = field.eval(x, y)?;
    Ok((d[2], -d[1]))
}
