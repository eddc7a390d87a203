//! Eight-compartment dengue transmission model with an adult-mosquito
//! insecticide control.
//!
//! Humans follow an SEIR structure with a constant total population; the
//! female mosquito population has an aquatic stage (eggs, larvae, pupae)
//! followed by susceptible, exposed and infected adults. The insecticide
//! level `c` removes adult mosquitoes only.

use std::fmt;

use nalgebra::Matrix4;

use crate::error::ModelError;

/// States may dip below zero by this fraction of the human population before
/// they are treated as invalid.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-9;

/// All rates are per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    /// Total human population.
    pub human_population: f64,
    /// Average number of bites per mosquito per day.
    pub biting_rate: f64,
    /// Transmission probability per bite from an infected mosquito.
    pub mosquito_to_human_transmission: f64,
    /// Transmission probability per bite from an infected human.
    pub human_to_mosquito_transmission: f64,
    pub human_mortality: f64,
    /// Reciprocal of the mean viremic period.
    pub human_recovery: f64,
    pub mosquito_mortality: f64,
    /// Eggs at each deposit per capita.
    pub egg_deposit_rate: f64,
    pub larval_mortality: f64,
    /// Larva-to-adult maturation rate.
    pub larval_maturation: f64,
    /// Reciprocal of the extrinsic incubation period.
    pub mosquito_incubation: f64,
    /// Reciprocal of the intrinsic incubation period.
    pub human_incubation: f64,
    pub mosquitoes_per_human: f64,
    pub larvae_per_human: f64,
}

impl ModelParameters {
    /// Parameter set of the 2009 Cape Verde outbreak (human data) combined
    /// with Brazilian *Aedes aegypti* data.
    pub fn cape_verde_2009() -> Self {
        Self {
            human_population: 480_000.0,
            biting_rate: 1.0,
            mosquito_to_human_transmission: 0.375,
            human_to_mosquito_transmission: 0.375,
            human_mortality: 1.0 / (71.0 * 365.0),
            human_recovery: 1.0 / 3.0,
            mosquito_mortality: 1.0 / 11.0,
            egg_deposit_rate: 6.0,
            larval_mortality: 1.0 / 4.0,
            larval_maturation: 0.08,
            mosquito_incubation: 1.0 / 11.0,
            human_incubation: 1.0 / 4.0,
            mosquitoes_per_human: 6.0,
            larvae_per_human: 3.0,
        }
    }

    /// Maximal larval capacity `k * N_h`.
    pub fn larval_capacity(&self) -> f64 {
        self.larvae_per_human * self.human_population
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("human_population", self.human_population),
            ("biting_rate", self.biting_rate),
            ("mosquito_to_human_transmission", self.mosquito_to_human_transmission),
            ("human_to_mosquito_transmission", self.human_to_mosquito_transmission),
            ("human_mortality", self.human_mortality),
            ("human_recovery", self.human_recovery),
            ("mosquito_mortality", self.mosquito_mortality),
            ("egg_deposit_rate", self.egg_deposit_rate),
            ("larval_mortality", self.larval_mortality),
            ("larval_maturation", self.larval_maturation),
            ("mosquito_incubation", self.mosquito_incubation),
            ("human_incubation", self.human_incubation),
            ("mosquitoes_per_human", self.mosquitoes_per_human),
            ("larvae_per_human", self.larvae_per_human),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        for (name, value) in [
            ("mosquito_to_human_transmission", self.mosquito_to_human_transmission),
            ("human_to_mosquito_transmission", self.human_to_mosquito_transmission),
        ] {
            if value > 1.0 {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "probability must lie in [0, 1]",
                });
            }
        }
        Ok(())
    }
}

impl Default for ModelParameters {
    fn default() -> Self {
        Self::cape_verde_2009()
    }
}

/// Model compartments, in state-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compartment {
    SusceptibleHumans,
    ExposedHumans,
    InfectedHumans,
    RecoveredHumans,
    AquaticMosquitoes,
    SusceptibleMosquitoes,
    ExposedMosquitoes,
    InfectedMosquitoes,
}

impl Compartment {
    pub const ALL: [Compartment; 8] = [
        Compartment::SusceptibleHumans,
        Compartment::ExposedHumans,
        Compartment::InfectedHumans,
        Compartment::RecoveredHumans,
        Compartment::AquaticMosquitoes,
        Compartment::SusceptibleMosquitoes,
        Compartment::ExposedMosquitoes,
        Compartment::InfectedMosquitoes,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short column label, e.g. `I_h`.
    pub fn label(self) -> &'static str {
        match self {
            Compartment::SusceptibleHumans => "S_h",
            Compartment::ExposedHumans => "E_h",
            Compartment::InfectedHumans => "I_h",
            Compartment::RecoveredHumans => "R_h",
            Compartment::AquaticMosquitoes => "A_m",
            Compartment::SusceptibleMosquitoes => "S_m",
            Compartment::ExposedMosquitoes => "E_m",
            Compartment::InfectedMosquitoes => "I_m",
        }
    }
}

impl fmt::Display for Compartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Compartment sizes (or their rates of change).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub susceptible_humans: f64,
    pub exposed_humans: f64,
    pub infected_humans: f64,
    pub recovered_humans: f64,
    pub aquatic_mosquitoes: f64,
    pub susceptible_mosquitoes: f64,
    pub exposed_mosquitoes: f64,
    pub infected_mosquitoes: f64,
}

impl StateVector {
    pub fn from_array(v: [f64; 8]) -> Self {
        Self {
            susceptible_humans: v[0],
            exposed_humans: v[1],
            infected_humans: v[2],
            recovered_humans: v[3],
            aquatic_mosquitoes: v[4],
            susceptible_mosquitoes: v[5],
            exposed_mosquitoes: v[6],
            infected_mosquitoes: v[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.susceptible_humans,
            self.exposed_humans,
            self.infected_humans,
            self.recovered_humans,
            self.aquatic_mosquitoes,
            self.susceptible_mosquitoes,
            self.exposed_mosquitoes,
            self.infected_mosquitoes,
        ]
    }

    pub fn get(&self, compartment: Compartment) -> f64 {
        self.to_array()[compartment.index()]
    }

    /// Outbreak initial state: `S_h = N_h - E_h - I_h`, nobody recovered,
    /// `A_m = k * N_h`, `S_m = m * N_h` and no exposed or infected mosquitoes.
    pub fn outbreak_start(params: &ModelParameters, exposed_humans: f64, infected_humans: f64) -> Self {
        Self {
            susceptible_humans: params.human_population - exposed_humans - infected_humans,
            exposed_humans,
            infected_humans,
            recovered_humans: 0.0,
            aquatic_mosquitoes: params.larval_capacity(),
            susceptible_mosquitoes: params.mosquitoes_per_human * params.human_population,
            exposed_mosquitoes: 0.0,
            infected_mosquitoes: 0.0,
        }
    }

    /// Every component clamped at zero from below.
    pub fn clamped(&self) -> Self {
        Self::from_array(self.to_array().map(|x| x.max(0.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Checks finiteness and that no component is below
    /// `-NEGATIVITY_TOLERANCE * N_h`.
    pub fn check_admissible(&self, params: &ModelParameters) -> Result<(), ModelError> {
        let floor = -NEGATIVITY_TOLERANCE * params.human_population;
        for (compartment, value) in Compartment::ALL.into_iter().zip(self.to_array()) {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteState { compartment });
            }
            if value < floor {
                return Err(ModelError::NegativeState { compartment, value });
            }
        }
        Ok(())
    }
}

/// `S_h + E_h + I_h + R_h`.
pub fn human_total(state: &StateVector) -> f64 {
    state.susceptible_humans + state.exposed_humans + state.infected_humans + state.recovered_humans
}

/// Right-hand side without input validation; used by the integrator stages.
pub(crate) fn rates(state: &StateVector, p: &ModelParameters, c: f64) -> StateVector {
    let n_h = p.human_population;
    let mosquito_force = p.biting_rate * p.mosquito_to_human_transmission * state.infected_mosquitoes / n_h;
    let human_force = p.biting_rate * p.human_to_mosquito_transmission * state.infected_humans / n_h;
    let adults = state.susceptible_mosquitoes + state.exposed_mosquitoes + state.infected_mosquitoes;

    StateVector {
        susceptible_humans: p.human_mortality * n_h - (mosquito_force + p.human_mortality) * state.susceptible_humans,
        exposed_humans: mosquito_force * state.susceptible_humans
            - (p.human_incubation + p.human_mortality) * state.exposed_humans,
        infected_humans: p.human_incubation * state.exposed_humans
            - (p.human_recovery + p.human_mortality) * state.infected_humans,
        recovered_humans: p.human_recovery * state.infected_humans - p.human_mortality * state.recovered_humans,
        // The insecticide does not reach the aquatic stage.
        aquatic_mosquitoes: p.egg_deposit_rate * (1.0 - state.aquatic_mosquitoes / p.larval_capacity()) * adults
            - (p.larval_maturation + p.larval_mortality) * state.aquatic_mosquitoes,
        susceptible_mosquitoes: -(human_force + p.mosquito_mortality) * state.susceptible_mosquitoes
            + p.larval_maturation * state.aquatic_mosquitoes
            - c * state.susceptible_mosquitoes,
        exposed_mosquitoes: human_force * state.susceptible_mosquitoes
            - (p.mosquito_mortality + p.mosquito_incubation) * state.exposed_mosquitoes
            - c * state.exposed_mosquitoes,
        infected_mosquitoes: p.mosquito_incubation * state.exposed_mosquitoes
            - p.mosquito_mortality * state.infected_mosquitoes
            - c * state.infected_mosquitoes,
    }
}

/// Time derivative of the state under insecticide level `c`.
pub fn derivative(state: &StateVector, params: &ModelParameters, c: f64) -> Result<StateVector, ModelError> {
    params.validate()?;
    if !(0.0..=1.0).contains(&c) {
        return Err(ModelError::ControlOutOfRange(c));
    }
    state.check_admissible(params)?;
    Ok(rates(state, params, c))
}

/// Disease-free equilibrium under a constant insecticide level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfeState {
    pub state: StateVector,
    pub control: f64,
    /// The mosquito population cannot sustain itself at this control level.
    pub extinct: bool,
}

/// Disease-free equilibrium for constant control `c`.
///
/// The human block is `(N_h, 0, 0, 0)`. The mosquito pair solves
/// `dA_m/dt = dS_m/dt = 0` with no exposed or infected mosquitoes; when the
/// offspring balance is not positive the vector goes extinct and the
/// returned equilibrium has `A_m = S_m = 0`.
pub fn dfe(params: &ModelParameters, c: f64) -> Result<DfeState, ModelError> {
    params.validate()?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(ModelError::NegativeControl(c));
    }
    let adult_loss = params.mosquito_mortality + c;
    let balance = 1.0
        - (params.larval_maturation + params.larval_mortality) * adult_loss
            / (params.egg_deposit_rate * params.larval_maturation);
    let extinct = balance <= 0.0;
    let (aquatic, adults) = if extinct {
        (0.0, 0.0)
    } else {
        let aquatic = params.larval_capacity() * balance;
        (aquatic, params.larval_maturation * aquatic / adult_loss)
    };
    Ok(DfeState {
        state: StateVector {
            susceptible_humans: params.human_population,
            aquatic_mosquitoes: aquatic,
            susceptible_mosquitoes: adults,
            ..StateVector::default()
        },
        control: c,
        extinct,
    })
}

/// New-infection (`F`) and transition (`V`) Jacobians of the infected
/// subsystem `(E_h, I_h, E_m, I_m)` at the disease-free equilibrium.
pub fn next_generation_split(eq: &DfeState, params: &ModelParameters) -> (Matrix4<f64>, Matrix4<f64>) {
    let p = params;
    let c = eq.control;
    let s = &eq.state;
    let n_h = p.human_population;

    // d/dI_m of B*beta_mh*I_m*S_h/N_h and d/dI_h of B*beta_hm*I_h*S_m/N_h.
    let into_humans = p.biting_rate * p.mosquito_to_human_transmission * s.susceptible_humans / n_h;
    let into_mosquitoes = p.biting_rate * p.human_to_mosquito_transmission * s.susceptible_mosquitoes / n_h;

    #[rustfmt::skip]
    let f = Matrix4::new(
        0.0, 0.0,             0.0, into_humans,
        0.0, 0.0,             0.0, 0.0,
        0.0, into_mosquitoes, 0.0, 0.0,
        0.0, 0.0,             0.0, 0.0,
    );
    #[rustfmt::skip]
    let v = Matrix4::new(
        p.human_incubation + p.human_mortality, 0.0,                               0.0,                                          0.0,
        -p.human_incubation,                    p.human_recovery + p.human_mortality, 0.0,                                       0.0,
        0.0,                                    0.0,                               p.mosquito_mortality + p.mosquito_incubation + c, 0.0,
        0.0,                                    0.0,                               -p.mosquito_incubation,                       p.mosquito_mortality + c,
    );
    (f, v)
}

/// Next-generation matrix `F V^-1` at `dfe(params, c)`.
pub fn next_generation_matrix(params: &ModelParameters, c: f64) -> Result<Matrix4<f64>, ModelError> {
    let eq = dfe(params, c)?;
    let (f, v) = next_generation_split(&eq, params);
    let v_inv = v.try_inverse().ok_or(ModelError::SingularTransition)?;
    Ok(f * v_inv)
}

/// Basic reproduction number: spectral radius of the next-generation matrix.
/// Zero when the vector population is extinct.
pub fn compute_r0(params: &ModelParameters, c: f64) -> Result<f64, ModelError> {
    let eq = dfe(params, c)?;
    if eq.extinct {
        return Ok(0.0);
    }
    let k = next_generation_matrix(params, c)?;
    Ok(k.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Control level at which `R0` crosses one, found by bisection on
/// `[lo, hi]` until the bracket is no wider than `tolerance`.
pub fn r0_threshold(params: &ModelParameters, lo: f64, hi: f64, tolerance: f64) -> Result<f64, ModelError> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(ModelError::InvalidInterval { lo, hi });
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(ModelError::InvalidTolerance(tolerance));
    }
    let excess = |c: f64| compute_r0(params, c).map(|r| r - 1.0);
    let (f_lo, f_hi) = (excess(lo)?, excess(hi)?);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(ModelError::Unbracketed {
            lo,
            hi,
            r0_lo: f_lo + 1.0,
            r0_hi: f_hi + 1.0,
        });
    }

    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        if b - a <= tolerance {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let f_mid = excess(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper() -> ModelParameters {
        ModelParameters::cape_verde_2009()
    }

    fn paper_start() -> StateVector {
        StateVector::outbreak_start(&paper(), 216.0, 434.0)
    }

    /// Closed-form R0 for this model, derived independently of the
    /// next-generation assembly.
    fn closed_form_r0(p: &ModelParameters, c: f64) -> f64 {
        let adult_loss = p.mosquito_mortality + c;
        let aquatic = p.larval_capacity()
            * (1.0
                - (p.larval_maturation + p.larval_mortality) * adult_loss / (p.egg_deposit_rate * p.larval_maturation));
        let adults = p.larval_maturation * aquatic / adult_loss;
        let num = p.biting_rate.powi(2)
            * p.mosquito_to_human_transmission
            * p.human_to_mosquito_transmission
            * p.human_incubation
            * p.mosquito_incubation
            * (adults / p.human_population);
        let den = (p.human_incubation + p.human_mortality)
            * (p.human_recovery + p.human_mortality)
            * (p.mosquito_mortality + p.mosquito_incubation + c)
            * adult_loss;
        (num / den).sqrt()
    }

    #[test]
    fn paper_start_rates() {
        let d = derivative(&paper_start(), &paper(), 0.0).unwrap();
        assert_eq!(d.infected_mosquitoes, 0.0);
        // -(1/4 + 1/(71*365)) * 216 and (1/3) * 434
        assert_relative_eq!(d.exposed_humans, -54.008_334_941_153_77, max_relative = 1e-12);
        assert_relative_eq!(d.recovered_humans, 144.666_666_666_666_67, max_relative = 1e-12);
    }

    #[test]
    fn human_total_of_paper_start() {
        assert_eq!(human_total(&paper_start()), 480_000.0);
        assert_eq!(human_total(&StateVector::default()), 0.0);
    }

    #[test]
    fn derivative_rejects_bad_inputs() {
        let p = paper();
        assert!(matches!(
            derivative(&paper_start(), &p, 1.5),
            Err(ModelError::ControlOutOfRange(_))
        ));
        assert!(matches!(
            derivative(&paper_start(), &p, -0.1),
            Err(ModelError::ControlOutOfRange(_))
        ));
        let mut s = paper_start();
        s.exposed_mosquitoes = -1.0;
        assert!(matches!(
            derivative(&s, &p, 0.0),
            Err(ModelError::NegativeState {
                compartment: Compartment::ExposedMosquitoes,
                ..
            })
        ));
        // Round-off sized negatives are tolerated.
        s.exposed_mosquitoes = -1e-6;
        assert!(derivative(&s, &p, 0.0).is_ok());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut p = paper();
        p.human_to_mosquito_transmission = 1.2;
        assert!(p.validate().is_err());
        let mut p = paper();
        p.larval_mortality = 0.0;
        assert!(matches!(
            p.validate(),
            Err(ModelError::InvalidParameter {
                name: "larval_mortality",
                ..
            })
        ));
    }

    #[test]
    fn dfe_values() {
        let p = paper();
        let eq = dfe(&p, 0.0).unwrap();
        assert!(!eq.extinct);
        assert_relative_eq!(eq.state.aquatic_mosquitoes, 1_350_000.0, max_relative = 1e-12);
        assert_relative_eq!(eq.state.susceptible_mosquitoes, 1_188_000.0, max_relative = 1e-12);

        // 40-digit evaluation of the equilibrium at c = 0.084.
        let eq = dfe(&p, 0.084).unwrap();
        assert_relative_eq!(eq.state.aquatic_mosquitoes, 1_266_840.0, max_relative = 1e-12);
        assert_relative_eq!(
            eq.state.susceptible_mosquitoes,
            579_427.858_627_858_6,
            max_relative = 1e-12
        );
        assert!(eq.state.aquatic_mosquitoes <= p.larval_capacity());
    }

    #[test]
    fn dfe_is_a_fixed_point() {
        let p = paper();
        for c in [0.0, 0.084, 0.5] {
            let eq = dfe(&p, c).unwrap();
            let d = derivative(&eq.state, &p, c).unwrap();
            let worst = d.to_array().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            assert!(worst <= 1e-9 * p.human_population, "c={c}: {worst}");
        }
    }

    #[test]
    fn dfe_extinction() {
        let p = paper();
        // mu_m + c >= mu_b * eta_A / (eta_A + mu_A)
        let critical = p.egg_deposit_rate * p.larval_maturation / (p.larval_maturation + p.larval_mortality)
            - p.mosquito_mortality;
        for c in [critical, critical + 0.1, 5.0] {
            let eq = dfe(&p, c).unwrap();
            assert!(eq.extinct);
            assert_eq!(eq.state.aquatic_mosquitoes, 0.0);
            assert_eq!(eq.state.susceptible_mosquitoes, 0.0);
            assert_eq!(compute_r0(&p, c).unwrap(), 0.0);
        }
        assert!(dfe(&p, -0.1).is_err());
    }

    #[test]
    fn r0_reference_values() {
        let p = paper();
        // 40-digit evaluations of the closed form.
        assert_relative_eq!(
            compute_r0(&p, 0.0).unwrap(),
            2.396_084_838_081_026_5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            compute_r0(&p, 0.084).unwrap(),
            0.997_740_121_490_796_3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            compute_r0(&p, 0.5).unwrap(),
            0.151_491_886_442_752_1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn r0_matches_closed_form() {
        let p = paper();
        for i in 0..20 {
            let c = i as f64 / 19.0;
            let numeric = compute_r0(&p, c).unwrap();
            let oracle = closed_form_r0(&p, c);
            assert_relative_eq!(numeric, oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn r0_is_non_increasing_in_control() {
        let p = paper();
        let values: Vec<f64> = (0..50).map(|i| compute_r0(&p, i as f64 / 49.0).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn threshold_brackets_unity() {
        let p = paper();
        let c = r0_threshold(&p, 0.0, 1.0, 1e-10).unwrap();
        assert!((0.080..=0.085).contains(&c));
        // bisection to 200 digits over the closed form gives 0.0837170032746723...
        assert_relative_eq!(c, 0.083_717_003_274_672_3, max_relative = 1e-8);
        assert!((compute_r0(&p, c).unwrap() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn threshold_errors() {
        let p = paper();
        assert!(matches!(
            r0_threshold(&p, 0.5, 1.0, 1e-10),
            Err(ModelError::Unbracketed { .. })
        ));
        assert!(matches!(
            r0_threshold(&p, 0.3, 0.3, 1e-10),
            Err(ModelError::InvalidInterval { .. })
        ));
        assert!(r0_threshold(&p, 0.0, 1.0, 0.0).is_err());
    }

    fn arb_state() -> impl Strategy<Value = StateVector> {
        prop::array::uniform8(0.0..2.0e6_f64).prop_map(StateVector::from_array)
    }

    proptest! {
        #[test]
        fn human_rates_balance(state in arb_state()) {
            let p = paper();
            let d = rates(&state, &p, 0.3);
            let sum = d.susceptible_humans + d.exposed_humans + d.infected_humans + d.recovered_humans;
            let expected = p.human_mortality * (p.human_population - human_total(&state));
            let scale = d.to_array()[..4].iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            prop_assert!((sum - expected).abs() <= 1e-12 * scale);
        }

        #[test]
        fn control_only_touches_adults(state in arb_state()) {
            let p = paper();
            let (a, b) = (rates(&state, &p, 0.0), rates(&state, &p, 1.0));
            prop_assert_eq!(&a.to_array()[..5], &b.to_array()[..5]);
        }
    }
}
