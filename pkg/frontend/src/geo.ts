/** Map-point interpolation, shared contract with the hub's location registry.
 *
 * A map point is (x, y) with both in [0, 1]. x runs west to east across the
 * longitude span, y runs south to north across the latitude span. The server
 * computes lat/lon the same way when a location is created from a map point,
 * so the form can preview exactly what will be stored.
 */

export interface MapBounds {
  lat_min: number;
  lat_max: number;
  lon_min: number;
  lon_max: number;
}

export const DEFAULT_BOUNDS: MapBounds = {
  lat_min: 44.0,
  lat_max: 45.0,
  lon_min: 26.0,
  lon_max: 27.0,
};

export interface GeoPoint {
  latitude: number;
  longitude: number;
}

export function interpolate(bounds: MapBounds, x: number, y: number): GeoPoint {
  if (x < 0 || x > 1 || y < 0 || y > 1) {
    throw new RangeError(`map point (${x}, ${y}) outside the unit square`);
  }
  return {
    latitude: bounds.lat_min + y * (bounds.lat_max - bounds.lat_min),
    longitude: bounds.lon_min + x * (bounds.lon_max - bounds.lon_min),
  };
}

export function toMapPoint(bounds: MapBounds, point: GeoPoint): { x: number; y: number } {
  return {
    x: (point.longitude - bounds.lon_min) / (bounds.lon_max - bounds.lon_min),
    y: (point.latitude - bounds.lat_min) / (bounds.lat_max - bounds.lat_min),
  };
}
