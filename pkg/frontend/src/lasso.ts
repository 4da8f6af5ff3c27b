// Freehand lasso selection over the current layout.

export type Vertex = [number, number];

export function pointInPolygon(x: number, y: number, polygon: Vertex[]): boolean {
  // ray casting; edges crossing the horizontal ray through (x, y)
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const [xi, yi] = polygon[i];
    const [xj, yj] = polygon[j];
    const crosses =
      yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi;
    if (crosses) inside = !inside;
  }
  return inside;
}

/** Ids of the points strictly enclosed by the polygon, sorted. */
export function lassoSelect(
  positions: Record<string, [number, number]>,
  polygon: Vertex[],
): string[] {
  if (polygon.length < 3) return []; // degenerate lasso selects nothing
  const hit: string[] = [];
  for (const [id, [x, y]] of Object.entries(positions)) {
    if (pointInPolygon(x, y, polygon)) hit.push(id);
  }
  return hit.sort();
}
