//! Rate-quality profiles: what the allocator consults before picking a
//! code length. Each pending image is profiled across the action menu,
//! and the profile's spread is summarized by a single transmission
//! coefficient (0 = rate-insensitive, 1 = full-range sensitive).
//!
//! Run with: `cargo run --example rd_profiles`

use voilink::codec::{profile_image, DctCodec, LinkCodec, SampleView};
use voilink::image::synthetic_corpus;
use voilink::seeds;

fn main() {
    let codec = LinkCodec::Dct(DctCodec::new());
    let menu: Vec<f64> = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0]
        .iter()
        .map(|k| k / 48.0)
        .collect();

    let images = synthetic_corpus(2025, 4, 48, 48, 1).unwrap();
    println!("per-image quality by menu level at 7 dB (4 noise trials):");
    print!("{:>8}", "image");
    for eta in &menu {
        print!(" {:>8.4}", eta);
    }
    println!(" {:>6}", "mu");
    for (i, image) in images.iter().enumerate() {
        let sample = SampleView::of_image(image, i as u64);
        let mut rng = seeds::stream(2025, "profile-demo", i as u64);
        let profile = profile_image(&codec, &sample, 7.0, &menu, 4, &mut rng).unwrap();
        print!("{i:>8}");
        for q in &profile.psnr_db {
            print!(" {q:>8.2}");
        }
        println!(" {:>6.3}", profile.mu);
    }

    // The same menu on the same image, across link SNRs: the whole
    // profile shifts up as the channel clears.
    println!("\nimage 0 by link SNR:");
    let sample = SampleView::of_image(&images[0], 0);
    for gamma_db in [1.0, 7.0, 13.0] {
        let mut rng = seeds::stream(2025, "profile-demo-snr", gamma_db as u64);
        let profile = profile_image(&codec, &sample, gamma_db, &menu, 4, &mut rng).unwrap();
        print!("{gamma_db:>5.0} dB");
        for q in &profile.psnr_db {
            print!(" {q:>8.2}");
        }
        println!(" {:>6.3}", profile.mu);
    }
}
