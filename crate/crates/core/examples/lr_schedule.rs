// Linear warmup to 1e-4 over 2000 steps, then linear decay to zero.
//
//     cargo run --example lr_schedule

use std::error::Error;

use corpusforge::run_controller::LrSchedule;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let schedule = LrSchedule::with_defaults(10_000)?;
    for step in [0, 500, 1000, 2000, 4000, 8000, 10_000] {
        println!("step {step:>6}  lr {:e}", schedule.lr_at(step)?);
    }
    assert_eq!(schedule.lr_at(2000)?, 1e-4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
