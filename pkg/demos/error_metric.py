"""
Absolute percentage error
=========================

The error reported for a volume estimate against a measured volume.
"""

from scalecam.scale import absolute_percentage_error, metric_volume

# 345 mL estimated against 371 mL measured.
print("%.2f%%" % absolute_percentage_error(345, 371))

# The measurement carries +-1 mL; the error moves by about a quarter point.
for truth in (370, 371, 372):
    print(truth, "->", round(absolute_percentage_error(345, truth), 3))

# A 345 mL estimate corresponds to 3.45e5 cubic pixels at 1 mm per pixel.
print(metric_volume(3.45e5, 1e-3), "mL")
