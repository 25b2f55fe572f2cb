/// Crossover prompt with `{api_description}`, `{program 1 code}` and `{program 2 code}` slots.
pub const HYBRID_TEMPLATE: &str = include_str!("../../assets/templates/hybrid.txt");

/// Fill the crossover template with the API text and two header-stripped parents.
///
/// The stored template leaves the second code fence open; it is closed here so
/// both parents are delimited the same way.
pub fn build_hybrid_prompt(parent_a: &str, parent_b: &str, api_description: &str) -> String {
    HYBRID_TEMPLATE
        .replace("{api_description}", api_description.trim_end())
        .replace("{program 1 code}", parent_a.trim_end())
        .replace("{program 2 code}", &format!("{}\n```", parent_b.trim_end()))
}
