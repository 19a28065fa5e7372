// Client-side session: token present iff logged in; zone set only after a
// successful locate. Screens that need a token (or a zone) are unreachable
// until the session has one.

export interface ClientSession {
    token: string | null;
    userId: string | null;
    zoneId: string | null;
    zoneName: string | null;
}

export type Screen = 'register' | 'login' | 'locate' | 'browse';

export function emptySession(): ClientSession {
    return { token: null, userId: null, zoneId: null, zoneName: null };
}

export function loggedIn(session: ClientSession): boolean {
    return session.token !== null;
}

export function allowedScreen(session: ClientSession, screen: Screen): Screen {
    if (screen === 'register' || screen === 'login') {
        return screen;
    }
    if (!loggedIn(session)) {
        return 'login';
    }
    if (screen === 'browse' && session.zoneId === null) {
        return 'locate';
    }
    return screen;
}
