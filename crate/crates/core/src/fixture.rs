//! Synthetic country-year panel with known coefficients, used for the
//! bundled example and for end-to-end tests.
//!
//! Ten countries over 2009-2023. The response `ODA` is an exact linear
//! function of the nineteen regressors plus Gaussian noise with a chosen
//! standard deviation. The four openness variables share one latent factor,
//! so they are strongly collinear. Regressors are drawn from one random
//! stream and the response noise from another, so changing the noise level
//! leaves the regressors untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::estimators::INTERCEPT;
use crate::panel::{IdColumns, Panel, PanelKey, PanelRow, Role, VariableSpec};

pub const FIXTURE_COUNTRIES: [&str; 10] = [
    "Afghanistan",
    "Bangladesh",
    "Ethiopia",
    "Ghana",
    "Kenya",
    "Mozambique",
    "Nepal",
    "Nigeria",
    "Tanzania",
    "Uganda",
];
pub const FIXTURE_FIRST_YEAR: i32 = 2009;
pub const FIXTURE_YEARS: usize = 15;
pub const FIXTURE_SEED: u64 = 20_240_601;
pub const FIXTURE_NOISE_SD: f64 = 250.0;

/// Intercept followed by the regressors, in column order.
pub const PLANTED: [(&str, f64); 20] = [
    (INTERCEPT, -2_000.0),
    ("CurrentAccount", -1.0),
    ("CPI", 40.0),
    ("Property_Rights", 700.0),
    ("Transparency", -250.0),
    ("Corruption_Index", -50.0),
    ("Exports", -55.0),
    ("FDI", -12.0),
    ("GDPperCap", 0.7),
    ("Displaced_Persons", 0.002),
    ("Imports", 1.0),
    ("Macroeconomic_Mgmt", -15.0),
    ("Military_Expenditure", -200.0),
    ("Political_Stability", 380.0),
    ("Poverty_Gap", 65.0),
    ("Remittances", -180.0),
    ("Tax_Revenue", 120.0),
    ("Voice_Accountability", -1_700.0),
    ("Democracy_Score", 55.0),
    ("Violence_Casualties", 0.001),
];

pub const ADPI_COLUMNS: [&str; 3] = ["GDP_musd", "Gov_Revenue_musd", "Tax_Revenue_musd"];

pub fn fixture_regressors() -> Vec<String> {
    PLANTED[1..].iter().map(|(n, _)| n.to_string()).collect()
}

/// Config matching the fixture: every regressor, the default openness block,
/// the ADPI mapping and a fixed seed.
pub fn fixture_config() -> PipelineConfig {
    let mut c = PipelineConfig::new("ODA", fixture_regressors());
    c.seed = Some(42);
    c.adpi_oda = Some("ODA".into());
    c.adpi_gdp = Some(ADPI_COLUMNS[0].into());
    c.adpi_revenue = Some(ADPI_COLUMNS[1].into());
    c.adpi_tax = Some(ADPI_COLUMNS[2].into());
    c
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn synthetic_panel(seed: u64, noise_sd: f64) -> Result<Panel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(1);

    let mut variables =
        vec![VariableSpec::new("ODA", Role::Response).with_unit("million USD, current")];
    variables.extend(
        fixture_regressors()
            .into_iter()
            .map(|n| VariableSpec::new(n, Role::Regressor)),
    );
    variables.extend(
        ADPI_COLUMNS
            .iter()
            .map(|n| VariableSpec::new(*n, Role::RawComponent).with_unit("million USD, current")),
    );

    let mut rows = Vec::with_capacity(FIXTURE_COUNTRIES.len() * FIXTURE_YEARS);
    for country in FIXTURE_COUNTRIES {
        // country profile: a handful of persistent levels
        let u: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
        let gdp_base = 400.0 + 2_600.0 * u[0];
        let population = 5.0 + 195.0 * u[1];
        let openness_level = 2.0 * u[2] - 1.0;
        let revenue_extra = 0.02 + 0.03 * u[3];

        for t in 0..FIXTURE_YEARS {
            let tf = t as f64;
            let gdp_pc = gdp_base * 1.03f64.powf(tf) * (0.05 * normal(&mut rng)).exp();
            let factor = openness_level + 0.05 * tf + 0.8 * normal(&mut rng);
            let x = [
                -4.0 - 2.2 * factor + 0.8 * normal(&mut rng),
                5.0 + 10.0 * u[4] + 4.0 * normal(&mut rng),
                2.5 + u[5] + 0.2 * normal(&mut rng),
                2.0 + u[6] + 0.2 * normal(&mut rng),
                -1.0 + 0.5 * u[7] + 0.15 * normal(&mut rng),
                20.0 + 6.0 * factor + 1.5 * normal(&mut rng),
                3.0 + 1.8 * factor + 0.6 * normal(&mut rng),
                gdp_pc,
                1e5 * u[1] * (0.5 * normal(&mut rng)).exp(),
                30.0 + 7.0 * factor + 1.5 * normal(&mut rng),
                3.0 + 0.5 * u[3] + 0.25 * normal(&mut rng),
                1.0 + 2.0 * u[2] + 0.3 * normal(&mut rng),
                -1.2 + 0.8 * u[5] + 0.25 * normal(&mut rng),
                10.0 + 25.0 * u[0] - 0.3 * tf + 2.0 * normal(&mut rng),
                1.0 + 6.0 * u[6] + 0.8 * normal(&mut rng),
                8.0 + 10.0 * u[4] + normal(&mut rng),
                -1.0 + 0.8 * u[7] + 0.15 * normal(&mut rng),
                3.0 + 4.0 * u[7] + 0.5 * normal(&mut rng),
                500.0 * u[2] * normal(&mut rng).exp(),
            ];
            let oda = PLANTED[0].1
                + PLANTED[1..]
                    .iter()
                    .zip(&x)
                    .map(|((_, b), v)| b * v)
                    .sum::<f64>()
                + noise_sd * normal(&mut noise);

            let gdp = gdp_pc * population * 1.025f64.powf(tf);
            let tax_musd = gdp * x[15] / 100.0;
            let revenue = tax_musd + gdp * revenue_extra;

            let mut values: Vec<Option<f64>> = Vec::with_capacity(23);
            values.push(Some(oda));
            values.extend(x.iter().map(|v| Some(*v)));
            values.extend([Some(gdp), Some(revenue), Some(tax_musd)]);
            rows.push(PanelRow {
                key: PanelKey::new(country, FIXTURE_FIRST_YEAR + t as i32),
                values,
            });
        }
    }
    Panel::from_rows(IdColumns::default(), variables, rows)
}

/// The bundled panel at its default seed and noise level.
pub fn default_panel() -> Result<Panel> {
    synthetic_panel(FIXTURE_SEED, FIXTURE_NOISE_SD)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let a = default_panel().unwrap();
        assert_eq!(a.len(), 150);
        assert_eq!(a.countries().len(), 10);
        assert_eq!(a.years(), (2009..=2023).collect::<Vec<_>>());
        assert_eq!(a, default_panel().unwrap());
    }

    #[test]
    fn noise_level_leaves_regressors_alone() {
        let a = synthetic_panel(7, 0.0).unwrap();
        let b = synthetic_panel(7, 100.0).unwrap();
        for row in 0..a.len() {
            assert_eq!(
                a.value(row, "Exports").unwrap(),
                b.value(row, "Exports").unwrap()
            );
        }
        assert_ne!(a.value(0, "ODA").unwrap(), b.value(0, "ODA").unwrap());
    }
}
