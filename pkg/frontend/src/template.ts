// Static markup for the single-page app; app.ts wires the handlers by id.

export const APP_HTML = `
<header class="topbar">
    <h1>restocloud</h1>
    <span id="session-info"></span>
    <button id="logout-btn" hidden>Log out</button>
</header>

<div id="connectivity-banner" class="banner" hidden>
    Cannot reach the server.
    <button id="retry-btn">Retry</button>
</div>

<main>
    <section id="screen-register" hidden>
        <h2>Register</h2>
        <form id="register-form">
            <label>Phone number
                <input id="register-phone" placeholder="+91 98450-12345" autocomplete="off">
            </label>
            <label>Password
                <input id="register-password" type="password">
            </label>
            <label>Food styles you want (comma separated)
                <input id="register-preferences" placeholder="indian, chinese" autocomplete="off">
            </label>
            <button type="submit">Register</button>
        </form>
        <p id="register-error" class="error" hidden></p>
        <p id="register-success" class="success" hidden></p>
        <p><a href="#" id="to-login">Already registered? Log in</a></p>
    </section>

    <section id="screen-login" hidden>
        <h2>Log in</h2>
        <form id="login-form">
            <label>Unique id (phone number)
                <input id="login-userid" autocomplete="off">
            </label>
            <label>Password
                <input id="login-password" type="password">
            </label>
            <button type="submit">Log in</button>
        </form>
        <p id="login-error" class="error" hidden></p>
        <p><a href="#" id="to-register">New user? Register</a></p>
    </section>

    <section id="screen-locate" hidden>
        <h2>Where are you?</h2>
        <form id="rfid-form">
            <label>RFID tag
                <input id="rfid-tag" list="rfid-suggestions" placeholder="T-RS" autocomplete="off">
            </label>
            <datalist id="rfid-suggestions">
                <option value="T-RS"></option>
                <option value="T-DT"></option>
                <option value="T-UP"></option>
            </datalist>
            <button type="submit">Read tag</button>
        </form>
        <form id="gps-form">
            <label>x (m) <input id="gps-x" inputmode="decimal"></label>
            <label>y (m) <input id="gps-y" inputmode="decimal"></label>
            <button type="submit">Use coordinates</button>
        </form>
        <p id="locate-error" class="error" hidden></p>
    </section>

    <section id="screen-browse" hidden>
        <h2 id="zone-title"></h2>
        <p><a href="#" id="relocate">Change location</a></p>
        <form id="query-form">
            <label>Search a food style
                <input id="query-category" placeholder="thai" autocomplete="off">
            </label>
            <button type="submit">Search</button>
        </form>
        <p id="browse-error" class="error" hidden></p>
        <p id="partial-notice" class="banner" hidden></p>
        <ul id="restaurant-list"></ul>
        <p id="empty-state" hidden>No restaurants in this zone yet.</p>

        <div id="detail-card" class="card" hidden>
            <h3 id="detail-name"></h3>
            <p id="detail-address"></p>
            <p id="detail-contact"></p>
            <p id="detail-style"></p>
            <button id="detail-close">Back to list</button>
        </div>

        <div id="escalation-prompt" class="card" hidden>
            <p id="escalation-text"></p>
            <button id="escalate-btn">Search every zone</button>
            <button id="escalation-close">Cancel</button>
        </div>

        <div id="escalated-results" hidden>
            <h3><span class="badge" id="escalated-badge"></span>
                results for <span id="escalated-category"></span></h3>
            <div id="escalated-groups"></div>
            <button id="escalated-close">Back to list</button>
        </div>
    </section>
</main>

<div id="modal-backdrop" hidden>
    <div id="modal" class="card" role="dialog">
        <p id="modal-text"></p>
        <button id="modal-ok">OK</button>
    </div>
</div>
`;
