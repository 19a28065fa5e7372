import { initApp } from './app.js';

initApp(document.getElementById('app') as HTMLElement).catch((e) => {
    const app = document.getElementById('app');
    if (app) {
        app.textContent = `Cannot start: ${e}. Is config.json in place?`;
    }
});
