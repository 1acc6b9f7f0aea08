"""
Adaptive Gaussian thresholding
==============================

Grey-scale digits are turned into bit images before training.  Each pixel
is compared with a Gaussian-weighted mean of its 11x11 neighbourhood, less
an offset of 2.  Stroke edges survive, and slow background gradients are
removed.
"""

from pathlib import Path

from convtm import adaptive_gaussian_binarize, load_idx_images

# A synthetic 28x28 digit kept with the test fixtures.
digit = load_idx_images(Path(__file__).parent.parent / "tests" / "data" / "digit-images.idx")[0]

shades = " .:-=+*#%@"
for row in digit:
    print("".join(shades[int(v) * (len(shades) - 1) // 255] for v in row))

bits = adaptive_gaussian_binarize(digit, window=11, c=2)
print()
for row in bits:
    print("".join("#" if v else "." for v in row))

# Flat regions come out as 1, since a pixel always exceeds its own mean
# minus a positive offset.  Only pixels darker than their surroundings drop to 0.
print("fraction of 1 bits:", round(float(bits.mean()), 3))
