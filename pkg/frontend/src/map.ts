// Plain-canvas map: fixture coordinates projected into the viewport.
// No tile provider; projection is a linear fit of the candidate bounding box.

import type { InstanceRecord } from "./types.js";

export interface MapPoint {
  id: string;
  name: string;
  x: number;
  y: number;
  visited: boolean;
  order: number | null; // 0-based position in the itinerary, if visited
}

export function projectPoints(
  instance: InstanceRecord,
  visitedIds: string[],
  width: number,
  height: number,
  margin = 20,
): MapPoint[] {
  const candidates = instance.candidates;
  if (candidates.length === 0) return [];
  const lats = candidates.map((p) => p.location.lat);
  const lons = candidates.map((p) => p.location.lon);
  const latMin = Math.min(...lats);
  const latMax = Math.max(...lats);
  const lonMin = Math.min(...lons);
  const lonMax = Math.max(...lons);
  const latSpan = latMax - latMin || 1e-9;
  const lonSpan = lonMax - lonMin || 1e-9;
  return candidates.map((poi) => {
    const fx = (poi.location.lon - lonMin) / lonSpan;
    const fy = (poi.location.lat - latMin) / latSpan;
    const order = visitedIds.indexOf(poi.id);
    return {
      id: poi.id,
      name: poi.name,
      x: margin + fx * (width - 2 * margin),
      y: height - margin - fy * (height - 2 * margin), // north up
      visited: order >= 0,
      order: order >= 0 ? order : null,
    };
  });
}

export function drawMap(canvas: HTMLCanvasElement, points: MapPoint[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const route = points
    .filter((p) => p.visited)
    .sort((a, b) => (a.order ?? 0) - (b.order ?? 0));
  ctx.strokeStyle = "#2a6fdb";
  ctx.lineWidth = 2;
  ctx.beginPath();
  route.forEach((p, i) => {
    if (i === 0) ctx.moveTo(p.x, p.y);
    else ctx.lineTo(p.x, p.y);
  });
  ctx.stroke();
  for (const p of points) {
    ctx.beginPath();
    ctx.fillStyle = p.visited ? "#2a6fdb" : "#9aa4b2";
    ctx.arc(p.x, p.y, p.visited ? 6 : 4, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillStyle = "#222";
    ctx.font = "11px sans-serif";
    ctx.fillText(p.order !== null ? `${p.order + 1}. ${p.name}` : p.name, p.x + 8, p.y + 4);
  }
}
