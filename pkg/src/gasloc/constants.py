"""Physical constants shared across the package (SI units)."""

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact
EARTH_MU = 3.986004418e14  # m^3/s^2
EARTH_RADIUS = 6_371_000.0  # m, spherical mean radius
EARTH_ROTATION_RATE = 7.2921159e-5  # rad/s
IONO_K = 40.3  # m^3/s^2 per electron/m^2
SECONDS_PER_DAY = 86_400.0
