// Client for the documented wire endpoints. Every response body is an
// envelope; transport failures throw ConnectivityError so screens can show
// the retry banner instead of an error message.

export interface Envelope {
    status: 'ok' | 'error';
    message: string;
    data?: Record<string, any>;
}

export interface TopologyConfig {
    lsp: string;
    cus: { [zone: string]: string };
}

export interface RestaurantRecord {
    restaurant_id: string;
    name: string;
    address: string;
    contact: string;
    food_style: string;
    x: number;
    y: number;
    zone_id: string;
}

export class ConnectivityError extends Error {}

let topology: TopologyConfig | null = null;
let fetchImpl: typeof fetch = (input, init) => fetch(input, init);

export function configure(config: TopologyConfig, customFetch?: typeof fetch) {
    topology = {
        lsp: stripSlash(config.lsp),
        cus: Object.fromEntries(
            Object.entries(config.cus).map(([zone, url]) => [zone, stripSlash(url)])),
    };
    if (customFetch) {
        fetchImpl = customFetch;
    }
}

// The app has exactly one setting: where it is served from. The topology
// addresses live in config.json next to index.html.
export async function loadConfig(url = 'config.json'): Promise<TopologyConfig> {
    const resp = await fetchImpl(url);
    if (!resp.ok) {
        throw new ConnectivityError(`cannot load ${url}`);
    }
    const config = await resp.json() as TopologyConfig;
    configure(config);
    return config;
}

function stripSlash(url: string): string {
    return url.replace(/\/+$/, '');
}

function lspBase(): string {
    if (!topology) throw new ConnectivityError('not configured');
    return topology.lsp;
}

export function cuBase(zone: string): string {
    if (!topology) throw new ConnectivityError('not configured');
    const url = topology.cus[zone];
    if (!url) throw new ConnectivityError(`no cloud unit known for zone ${zone}`);
    return url;
}

async function call(url: string, init: RequestInit = {}): Promise<Envelope> {
    let resp: Response;
    try {
        resp = await fetchImpl(url, init);
    } catch (e) {
        throw new ConnectivityError(String(e));
    }
    try {
        return await resp.json() as Envelope;
    } catch (e) {
        throw new ConnectivityError(`non-JSON response from ${url}`);
    }
}

function post(url: string, body: unknown, token?: string): Promise<Envelope> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (token) headers['Authorization'] = `Bearer ${token}`;
    return call(url, { method: 'POST', headers, body: JSON.stringify(body) });
}

function get(url: string, token?: string): Promise<Envelope> {
    const headers: Record<string, string> = {};
    if (token) headers['Authorization'] = `Bearer ${token}`;
    return call(url, { headers });
}

export function register(phone: string, password: string, preferences: string[]) {
    return post(`${lspBase()}/lsp/register`, { phone, password, preferences });
}

export function login(userId: string, password: string) {
    return post(`${lspBase()}/lsp/login`, { user_id: userId, password });
}

export function locateRfid(tag: string) {
    return post(`${lspBase()}/locate`, { method: 'rfid', tag });
}

// Manual x/y entry becomes exact ranges to three fixed reference beacons,
// which the backend trilaterates straight back to (x, y).
const BEACONS: [number, number][] = [[0, 0], [500, 0], [0, 500]];

export function locateXY(x: number, y: number) {
    const observations = BEACONS.map(([bx, by]) => ({
        bx, by, d: Math.hypot(x - bx, y - by),
    }));
    return post(`${lspBase()}/locate`, { method: 'gps', observations });
}

export function recordPresence(token: string, zoneId: string) {
    return post(`${lspBase()}/lsp/presence`, { token, zone_id: zoneId });
}

export function listRestaurants(zone: string, token: string) {
    return get(`${cuBase(zone)}/cu/restaurants`, token);
}

export function queryCategory(zone: string, token: string, category: string) {
    return post(`${cuBase(zone)}/cu/query`, { category }, token);
}

export function restaurantInfo(zone: string, token: string, restaurantId: string) {
    return get(`${cuBase(zone)}/cu/restaurants/${restaurantId}`, token);
}
