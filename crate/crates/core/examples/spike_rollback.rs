// Replay a noisy loss curve with two injected spikes through the rollback
// controller and print every intervention.
//
//     cargo run --example spike_rollback

use std::error::Error;

use corpusforge::run_controller::{simulate_run, Action, ControllerConfig, LrSchedule};
use corpusforge::rng::SplitMix64;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut noise = SplitMix64::new(3);
    let losses: Vec<f64> = (0..2400)
        .map(|i| {
            let base = 2.0 + 6.0 / (1.0 + i as f64 / 100.0);
            let jitter = (noise.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 0.02;
            if i == 900 || i == 1700 { base * 4.0 } else { base + jitter }
        })
        .collect();

    let schedule = LrSchedule::with_defaults(5000)?;
    let trace = simulate_run(&schedule, &losses, 250, ControllerConfig::default())?;
    for row in trace.iter().filter(|r| r.action != Action::None) {
        println!(
            "step {:>5}  loss {:>7.3}  lr {:.3e}  {:?}",
            row.step, row.loss, row.effective_lr, row.action
        );
    }
    let rollbacks = trace.iter().filter(|r| matches!(r.action, Action::Rollback { .. })).count();
    assert_eq!(rollbacks, 2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
