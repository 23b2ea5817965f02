//! The exact closed-form gap for linear decoders versus the full pipeline.
//!
//! With a linear constant-variance decoder the gap has a closed form driven
//! entirely by the projected representation shift. Running the CNP twice and
//! taking the KL must agree with the formula to rounding error, including in
//! higher representation dimensions.
//!
//! ```bash
//! cargo run --example linear_exact
//! ```

use cnp_gapmeter::{
    aggregate, augment_representation, consistency_gap, encode, gap_linear_exact, kl_gaussian,
    predict, ContextSet, DecoderSpec, EncoderSpec, Representation,
};

fn main() -> cnp_gapmeter::Result<()> {
    // scalar path: full encode-aggregate-decode pipeline
    let encoder = EncoderSpec::sign(1.0)?;
    let decoder = DecoderSpec::linear(vec![0.8], 1.2)?;
    let context = ContextSet::from_xy(&[(0.1, -0.4), (0.5, -2.0), (0.9, 1.3)])?;
    let (x_new, y_new) = (0.7, 2.5);

    let pipeline = consistency_gap(&encoder, &decoder, &context, (&[x_new], y_new), &[0.0])?.delta;

    let r = aggregate(&encoder, &context)?;
    let h_new = encode(&encoder, &[x_new], y_new)?;
    let formula = gap_linear_exact(&decoder, &[0.8], &h_new, &r)?;

    println!("pipeline gap : {pipeline}");
    println!("closed form  : {formula}");
    println!("difference   : {:e}", (pipeline - formula).abs());

    // three-dimensional representation: same agreement
    let weights = vec![0.3, -0.5, 0.2];
    let dec3 = DecoderSpec::linear(weights.clone(), 0.9)?;
    let r3 = Representation::new(vec![0.4, -0.2, 0.7], 11);
    let h3 = vec![-0.6, 0.9, 0.1];
    let r3_plus = augment_representation(&r3, &h3)?;
    let direct = kl_gaussian(
        &predict(&dec3, &[0.0], &r3_plus)?,
        &predict(&dec3, &[0.0], &r3)?,
    );
    let formula3 = gap_linear_exact(&dec3, &weights, &h3, &r3)?;
    println!("\nd = 3 direct KL  : {direct}");
    println!("d = 3 closed form: {formula3}");
    println!("difference       : {:e}", (direct - formula3).abs());
    Ok(())
}
