// Screen wiring for the single-page client. Four screens mirror the
// backend journey: register, login, locate (RFID tag or manual x/y),
// browse (list, detail card, escalated cross-zone view).

import * as api from './api.js';
import { ConnectivityError, Envelope, RestaurantRecord } from './api.js';
import { APP_HTML } from './template.js';
import { ClientSession, Screen, allowedScreen, emptySession } from './session.js';

const SCREENS: Screen[] = ['register', 'login', 'locate', 'browse'];

export class App {
    session: ClientSession = emptySession();
    root: HTMLElement;
    private restaurants: RestaurantRecord[] = [];
    private retry: (() => void) | null = null;

    constructor(root: HTMLElement) {
        this.root = root;
        root.innerHTML = APP_HTML;
        this.wireRegister();
        this.wireLogin();
        this.wireLocate();
        this.wireBrowse();
        this.wireChrome();
        this.show('register');
    }

    el<T extends HTMLElement>(id: string): T {
        return this.root.querySelector(`#${id}`) as T;
    }

    private input(id: string): HTMLInputElement {
        return this.el<HTMLInputElement>(id);
    }

    show(screen: Screen) {
        const target = allowedScreen(this.session, screen);
        for (const name of SCREENS) {
            this.el(`screen-${name}`).hidden = name !== target;
        }
        this.el('session-info').textContent = this.session.userId ?? '';
        this.el('logout-btn').hidden = this.session.token === null;
    }

    currentScreen(): Screen {
        return SCREENS.find((name) => !this.el(`screen-${name}`).hidden) ?? 'register';
    }

    // envelope message strings are rendered verbatim, never rephrased
    private showError(id: string, message: string) {
        const node = this.el(id);
        node.textContent = message;
        node.hidden = false;
    }

    private hide(...ids: string[]) {
        for (const id of ids) this.el(id).hidden = true;
    }

    private modal(text: string, onClose?: () => void) {
        this.el('modal-text').textContent = text;
        this.el('modal-backdrop').hidden = false;
        this.el<HTMLButtonElement>('modal-ok').onclick = () => {
            this.el('modal-backdrop').hidden = true;
            if (onClose) onClose();
        };
    }

    private connectivity(retry: () => void) {
        this.retry = retry;
        this.el('connectivity-banner').hidden = false;
    }

    private async guardFetch(id: string, action: () => Promise<void>) {
        try {
            await action();
            this.el('connectivity-banner').hidden = true;
        } catch (e) {
            if (e instanceof ConnectivityError) {
                this.connectivity(() => void this.guardFetch(id, action));
            } else {
                this.showError(id, String(e));
            }
        }
    }

    private wireChrome() {
        this.el<HTMLButtonElement>('retry-btn').addEventListener('click', () => {
            this.el('connectivity-banner').hidden = true;
            if (this.retry) this.retry();
        });
        this.el<HTMLButtonElement>('logout-btn').addEventListener('click', () => {
            this.session = emptySession();
            this.show('login');
        });
        this.el('to-login').addEventListener('click', (e) => {
            e.preventDefault();
            this.show('login');
        });
        this.el('to-register').addEventListener('click', (e) => {
            e.preventDefault();
            this.show('register');
        });
    }

    // -- register ---------------------------------------------------------

    private wireRegister() {
        this.el<HTMLFormElement>('register-form').addEventListener('submit', (e) => {
            e.preventDefault();
            this.hide('register-error', 'register-success');
            const phone = this.input('register-phone').value.trim();
            const password = this.input('register-password').value;
            if (!phone || !password) {
                // client-side block: no request leaves the browser
                this.showError('register-error', 'Phone number and password are required');
                return;
            }
            const preferences = this.input('register-preferences').value
                .split(',').map((s) => s.trim()).filter((s) => s.length > 0);
            void this.guardFetch('register-error', async () => {
                const envelope = await api.register(phone, password, preferences);
                if (envelope.status !== 'ok') {
                    this.showError('register-error', envelope.message);
                    return;
                }
                const userId = envelope.data!['user_id'] as string;
                const success = this.el('register-success');
                success.textContent = `Registered. Your unique id: ${userId}`;
                success.hidden = false;
                this.input('login-userid').value = userId;
            });
        });
    }

    // -- login --------------------------------------------------------------

    private wireLogin() {
        this.el<HTMLFormElement>('login-form').addEventListener('submit', (e) => {
            e.preventDefault();
            this.hide('login-error');
            const userId = this.input('login-userid').value.trim();
            const password = this.input('login-password').value;
            void this.guardFetch('login-error', async () => {
                const envelope = await api.login(userId, password);
                if (envelope.status !== 'ok') {
                    this.showError('login-error', envelope.message);
                    return;
                }
                this.session.token = envelope.data!['token'] as string;
                this.session.userId = userId;
                // the pop-up shows the envelope message: "Authenticated User"
                this.modal(envelope.message, () => this.show('locate'));
            });
        });
    }

    // -- locate ---------------------------------------------------------------

    private wireLocate() {
        this.el<HTMLFormElement>('rfid-form').addEventListener('submit', (e) => {
            e.preventDefault();
            this.locate(() => api.locateRfid(this.input('rfid-tag').value.trim()));
        });
        this.el<HTMLFormElement>('gps-form').addEventListener('submit', (e) => {
            e.preventDefault();
            const x = Number(this.input('gps-x').value);
            const y = Number(this.input('gps-y').value);
            if (!Number.isFinite(x) || !Number.isFinite(y)) {
                this.showError('locate-error', 'Coordinates must be numbers');
                return;
            }
            this.locate(() => api.locateXY(x, y));
        });
    }

    private locate(resolver: () => Promise<Envelope>) {
        this.hide('locate-error');
        void this.guardFetch('locate-error', async () => {
            const envelope = await resolver();
            if (envelope.status !== 'ok') {
                this.showError('locate-error', envelope.message);
                return;
            }
            const zoneId = envelope.data!['zone_id'] as string;
            const presence = await api.recordPresence(this.session.token!, zoneId);
            if (presence.status !== 'ok') {
                this.showError('locate-error', presence.message);
                return;
            }
            this.session.zoneId = zoneId;
            this.session.zoneName = zoneId;
            await this.loadRestaurants();
            this.show('browse');
        });
    }

    // -- browse -----------------------------------------------------------------

    private wireBrowse() {
        this.el('relocate').addEventListener('click', (e) => {
            e.preventDefault();
            this.show('locate');
        });
        this.el<HTMLButtonElement>('detail-close').addEventListener('click', () => {
            this.hide('detail-card');
        });
        this.el<HTMLButtonElement>('escalation-close').addEventListener('click', () => {
            this.hide('escalation-prompt');
        });
        this.el<HTMLButtonElement>('escalated-close').addEventListener('click', () => {
            this.hide('escalated-results');
        });
        this.el<HTMLFormElement>('query-form').addEventListener('submit', (e) => {
            e.preventDefault();
            const category = this.input('query-category').value.trim();
            if (category) void this.runQuery(category);
        });
    }

    private async loadRestaurants() {
        const envelope = await api.listRestaurants(this.session.zoneId!, this.session.token!);
        if (envelope.status !== 'ok') {
            this.showError('browse-error', envelope.message);
            return;
        }
        this.restaurants = envelope.data!['restaurants'] as RestaurantRecord[];
        this.renderList();
    }

    private renderList() {
        this.hide('browse-error', 'detail-card', 'escalation-prompt', 'escalated-results',
                  'partial-notice');
        this.el('zone-title').textContent = `Restaurants in ${this.session.zoneName}`;
        const list = this.el<HTMLUListElement>('restaurant-list');
        list.innerHTML = '';
        // render in backend order: it is sorted by restaurant id
        for (const record of this.restaurants) {
            const item = document.createElement('li');
            const link = document.createElement('a');
            link.href = '#';
            link.textContent = `${record.name} (${record.food_style})`;
            link.dataset['restaurantId'] = record.restaurant_id;
            link.addEventListener('click', (e) => {
                e.preventDefault();
                void this.openDetail(record);
            });
            item.appendChild(link);
            list.appendChild(item);
        }
        this.el('empty-state').hidden = this.restaurants.length > 0;
    }

    private async openDetail(record: RestaurantRecord) {
        this.hide('detail-card', 'escalation-prompt', 'escalated-results');
        await this.guardFetch('browse-error', async () => {
            const envelope = await api.restaurantInfo(
                this.session.zoneId!, this.session.token!, record.restaurant_id);
            if (envelope.status === 'ok') {
                const info = envelope.data!['restaurant'] as RestaurantRecord;
                this.el('detail-name').textContent = info.name;
                this.el('detail-address').textContent = info.address;
                this.el('detail-contact').textContent = `Contact: ${info.contact}`;
                this.el('detail-style').textContent = `Food style: ${info.food_style}`;
                this.el('detail-card').hidden = false;
                return;
            }
            if (envelope.message === 'NotAuthorized') {
                // the escalation path: offer the cross-zone search
                this.el('escalation-text').textContent =
                    `You are not subscribed to ${record.food_style}.`;
                this.el<HTMLButtonElement>('escalate-btn').onclick =
                    () => void this.runQuery(record.food_style);
                this.el('escalation-prompt').hidden = false;
                return;
            }
            this.showError('browse-error', envelope.message);
        });
    }

    private async runQuery(category: string) {
        this.hide('escalation-prompt', 'detail-card', 'escalated-results', 'partial-notice');
        await this.guardFetch('browse-error', async () => {
            const envelope = await api.queryCategory(
                this.session.zoneId!, this.session.token!, category);
            if (envelope.status !== 'ok') {
                this.showError('browse-error', envelope.message);
                return;
            }
            const rows = envelope.data!['restaurants'] as RestaurantRecord[];
            const servedBy = envelope.data!['served_by'] as string;
            if (servedBy === 'local') {
                this.restaurants = rows;
                this.renderList();
                return;
            }
            this.renderEscalated(category, rows, envelope);
        });
    }

    private renderEscalated(category: string, rows: RestaurantRecord[], envelope: Envelope) {
        this.el('escalated-badge').textContent =
            envelope.data!['served_by'] as string;  // "escalated"
        this.el('escalated-category').textContent = category;
        const groups = this.el('escalated-groups');
        groups.innerHTML = '';
        const byZone = new Map<string, RestaurantRecord[]>();
        for (const record of rows) {
            const bucket = byZone.get(record.zone_id) ?? [];
            bucket.push(record);
            byZone.set(record.zone_id, bucket);
        }
        for (const [zone, records] of byZone) {
            const heading = document.createElement('h4');
            heading.textContent = zone;
            const list = document.createElement('ul');
            for (const record of records) {
                const item = document.createElement('li');
                item.textContent = `${record.name} · ${record.address} · ${record.contact}`;
                list.appendChild(item);
            }
            groups.appendChild(heading);
            groups.appendChild(list);
        }
        if (byZone.size === 0) {
            const none = document.createElement('p');
            none.textContent = `No ${category} restaurants anywhere yet.`;
            groups.appendChild(none);
        }
        const failed = (envelope.data!['failed_zones'] ?? []) as string[];
        if (failed.length > 0) {
            const notice = this.el('partial-notice');
            notice.textContent =
                `${envelope.message}: some zones did not answer (${failed.join(', ')})`;
            notice.hidden = false;
        }
        this.el('escalated-results').hidden = false;
    }
}

export async function initApp(root: HTMLElement, configUrl = 'config.json'): Promise<App> {
    await api.loadConfig(configUrl);
    return new App(root);
}
